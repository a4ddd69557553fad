#include "prtbw/problems.hpp"

#include <cmath>

namespace prtbw {

namespace {

// mean and sd of a dataset column over a weighted unit set
void weighted_moments(const Dataset& data, int col, const VectorXd& wts, double& mean,
                      double& sd) {
    double sw = wts.sum();
    double m1 = 0.0, m2 = 0.0;
    for (int i = 0; i < data.n(); ++i) {
        m1 += wts(i) * data.X(i, col);
        m2 += wts(i) * data.X(i, col) * data.X(i, col);
    }
    mean = m1 / sw;
    double var = m2 / sw - mean * mean;
    sd = var > 1e-24 ? std::sqrt(var) : 1.0;  // constant column: center only
}

// target-population weights per estimand (used for both the target mean and
// the standardizer)
VectorXd target_weights(const Dataset& data, const EstimandSpec& est) {
    const int n = data.n();
    VectorXd tw = VectorXd::Zero(n);
    switch (est.kind) {
        case EstimandKind::ATE:
            tw.setOnes();
            break;
        case EstimandKind::ATT:
            for (int i = 0; i < n; ++i) tw(i) = data.z(i) == 1 ? 1.0 : 0.0;
            break;
        case EstimandKind::WATE: {
            if (!est.h_values) throw std::invalid_argument("WATE requires h values");
            const VectorXd& h = *est.h_values;
            if (h.size() != n) throw std::invalid_argument("h length mismatch");
            if ((h.array() < 0).any() || h.sum() <= 0.0)
                throw std::invalid_argument("h must be nonnegative and not all zero");
            tw = h;
            break;
        }
        case EstimandKind::Transport: {
            if (!data.r) throw std::invalid_argument("transport requires population indicator r");
            for (int i = 0; i < n; ++i) tw(i) = (*data.r)(i) == 0 ? 1.0 : 0.0;
            if (tw.sum() <= 0.0) throw std::invalid_argument("no target-population units");
            break;
        }
    }
    return tw;
}

}  // namespace

ConstraintSystem build_system(const Dataset& data, const BalancePartition& part,
                              const EstimandSpec& est) {
    data.validate();
    part.validate(data.p());

    ConstraintSystem sys;
    sys.n_total = data.n();
    for (int i = 0; i < data.n(); ++i)
        if (data.is_analysis(i)) sys.analysis_idx.push_back(i);
    sys.m = static_cast<int>(sys.analysis_idx.size());

    sys.z.resize(sys.m);
    int n1 = 0;
    for (int a = 0; a < sys.m; ++a) {
        sys.z(a) = data.z(sys.analysis_idx[a]);
        n1 += sys.z(a);
    }
    if (n1 == 0 || n1 == sys.m)
        throw std::invalid_argument("empty treatment arm among analysis units");

    const VectorXd tw = target_weights(data, est);

    sys.K = static_cast<int>(part.c_idx.size()) + 1;
    sys.L = static_cast<int>(part.g_idx.size());
    sys.c_cols.push_back(-1);
    for (int j : part.c_idx) sys.c_cols.push_back(j);
    sys.g_cols = part.g_idx;

    sys.c_center = VectorXd::Zero(sys.K);
    sys.c_scale = VectorXd::Ones(sys.K);
    sys.g_center = VectorXd::Zero(sys.L);
    sys.g_scale = VectorXd::Ones(sys.L);
    sys.c_target = VectorXd::Zero(sys.K);
    sys.c_target(0) = 1.0;

    for (int k = 1; k < sys.K; ++k) {
        weighted_moments(data, sys.c_cols[k], tw, sys.c_center(k), sys.c_scale(k));
        // target mean in standardized coordinates is 0 by construction
        sys.c_target(k) = 0.0;
    }
    for (int l = 0; l < sys.L; ++l)
        weighted_moments(data, sys.g_cols[l], tw, sys.g_center(l), sys.g_scale(l));

    sys.C.resize(sys.m, sys.K);
    sys.G.resize(sys.m, sys.L);
    for (int a = 0; a < sys.m; ++a) {
        const int i = sys.analysis_idx[a];
        sys.C(a, 0) = 1.0;
        for (int k = 1; k < sys.K; ++k)
            sys.C(a, k) = (data.X(i, sys.c_cols[k]) - sys.c_center(k)) / sys.c_scale(k);
        for (int l = 0; l < sys.L; ++l)
            sys.G(a, l) = (data.X(i, sys.g_cols[l]) - sys.g_center(l)) / sys.g_scale(l);
    }
    return sys;
}

MatrixXd ConstraintSystem::constraint_matrix() const {
    MatrixXd A = MatrixXd::Zero(rows(), m);
    const double inv_m = 1.0 / m;
    for (int a = 0; a < m; ++a) {
        if (z(a) == 1) {
            for (int k = 0; k < K; ++k) A(k, a) = inv_m * C(a, k);
            for (int l = 0; l < L; ++l) A(2 * K + l, a) = inv_m * G(a, l);
        } else {
            for (int k = 0; k < K; ++k) A(K + k, a) = inv_m * C(a, k);
            for (int l = 0; l < L; ++l) A(2 * K + l, a) = -inv_m * G(a, l);
        }
    }
    return A;
}

VectorXd ConstraintSystem::rhs() const {
    VectorXd b = VectorXd::Zero(rows());
    b.head(K) = c_target;
    b.segment(K, K) = c_target;
    return b;
}

VectorXd ConstraintSystem::residuals_std(const VectorXd& w_full) const {
    VectorXd r = VectorXd::Zero(rows());
    const double inv_m = 1.0 / m;
    for (int a = 0; a < m; ++a) {
        const double w = w_full(analysis_idx[a]);
        if (z(a) == 1) {
            for (int k = 0; k < K; ++k) r(k) += inv_m * w * C(a, k);
            for (int l = 0; l < L; ++l) r(2 * K + l) += inv_m * w * G(a, l);
        } else {
            for (int k = 0; k < K; ++k) r(K + k) += inv_m * w * C(a, k);
            for (int l = 0; l < L; ++l) r(2 * K + l) -= inv_m * w * G(a, l);
        }
    }
    r.head(K) -= c_target;
    r.segment(K, K) -= c_target;
    return r;
}

VectorXd ConstraintSystem::residuals_orig(const VectorXd& w_full) const {
    VectorXd r = residuals_std(w_full);
    // undo the column scaling; the centering cancels because the intercept
    // rows pin the per-arm weight sums to m
    for (int k = 0; k < K; ++k) {
        r(k) *= c_scale(k);
        r(K + k) *= c_scale(k);
    }
    for (int l = 0; l < L; ++l) r(2 * K + l) *= g_scale(l);
    return r;
}

void DualObjective::etas(const VectorXd& theta, VectorXd& eta1, VectorXd& eta0) const {
    const int K = sys_.K, L = sys_.L;
    const VectorXd alpha0 = theta.head(K);
    const VectorXd alpha1 = theta.segment(K, K);
    const VectorXd gamma = theta.tail(L);
    const VectorXd Cg = sys_.G * gamma;
    eta1 = sys_.C * alpha1 + Cg;
    eta0 = sys_.C * alpha0 - Cg;
}

double DualObjective::loss(const VectorXd& theta) const {
    VectorXd eta1, eta0;
    etas(theta, eta1, eta0);
    const int K = sys_.K;
    double acc = 0.0;
    for (int a = 0; a < sys_.m; ++a)
        acc += sys_.z(a) == 1 ? -rho(d_, eta1(a)) : -rho(d_, eta0(a));
    double lin = (theta.head(K) + theta.segment(K, K)).dot(sys_.c_target);
    return acc / sys_.m + lin;
}

VectorXd DualObjective::gradient(const VectorXd& theta) const {
    VectorXd eta1, eta0;
    etas(theta, eta1, eta0);
    const int K = sys_.K, L = sys_.L;
    VectorXd g = VectorXd::Zero(dim());
    const double inv_m = 1.0 / sys_.m;
    for (int a = 0; a < sys_.m; ++a) {
        if (sys_.z(a) == 1) {
            const double w = rho_prime(d_, eta1(a));
            g.segment(K, K) -= inv_m * w * sys_.C.row(a).transpose();
            g.tail(L) -= inv_m * w * sys_.G.row(a).transpose();
        } else {
            const double w = rho_prime(d_, eta0(a));
            g.head(K) -= inv_m * w * sys_.C.row(a).transpose();
            g.tail(L) += inv_m * w * sys_.G.row(a).transpose();
        }
    }
    g.head(K) += sys_.c_target;
    g.segment(K, K) += sys_.c_target;
    return g;
}

MatrixXd DualObjective::hessian(const VectorXd& theta) const {
    VectorXd eta1, eta0;
    etas(theta, eta1, eta0);
    const int K = sys_.K, L = sys_.L;
    MatrixXd H = MatrixXd::Zero(dim(), dim());
    const double inv_m = 1.0 / sys_.m;
    VectorXd row(K + L);
    for (int a = 0; a < sys_.m; ++a) {
        if (sys_.z(a) == 1) {
            const double curv = -inv_m * rho_second(d_, eta1(a));
            if (curv == 0.0) continue;
            row.head(K) = sys_.C.row(a);
            row.tail(L) = sys_.G.row(a);
            H.block(K, K, K, K).noalias() += curv * row.head(K) * row.head(K).transpose();
            H.block(K, 2 * K, K, L).noalias() += curv * row.head(K) * row.tail(L).transpose();
            H.block(2 * K, 2 * K, L, L).noalias() += curv * row.tail(L) * row.tail(L).transpose();
        } else {
            const double curv = -inv_m * rho_second(d_, eta0(a));
            if (curv == 0.0) continue;
            row.head(K) = sys_.C.row(a);
            row.tail(L) = -sys_.G.row(a);
            H.block(0, 0, K, K).noalias() += curv * row.head(K) * row.head(K).transpose();
            H.block(0, 2 * K, K, L).noalias() += curv * row.head(K) * row.tail(L).transpose();
            H.block(2 * K, 2 * K, L, L).noalias() += curv * row.tail(L) * row.tail(L).transpose();
        }
    }
    H.block(2 * K, 0, L, K) = H.block(0, 2 * K, K, L).transpose();
    H.block(2 * K, K, L, K) = H.block(K, 2 * K, K, L).transpose();
    return H;
}

VectorXd DualObjective::weights(const VectorXd& theta) const {
    VectorXd eta1, eta0;
    etas(theta, eta1, eta0);
    VectorXd w(sys_.m);
    for (int a = 0; a < sys_.m; ++a)
        w(a) = sys_.z(a) == 1 ? rho_prime(d_, eta1(a)) : rho_prime(d_, eta0(a));
    return w;
}

}  // namespace prtbw
