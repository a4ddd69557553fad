#include "prtbw/comparators.hpp"

#include <algorithm>
#include <cmath>

namespace prtbw {

namespace {

std::vector<int> analysis_rows(const Dataset& data) {
    std::vector<int> rows;
    for (int i = 0; i < data.n(); ++i)
        if (data.is_analysis(i)) rows.push_back(i);
    return rows;
}

}  // namespace

PsFit fit_logistic_ps(const Dataset& data) {
    const std::vector<int> rows = analysis_rows(data);
    const int m = static_cast<int>(rows.size());
    const int p = data.p();
    MatrixXd D(m, p + 1);
    VectorXd zv(m);
    int n1 = 0;
    for (int i = 0; i < m; ++i) {
        D(i, 0) = 1.0;
        D.row(i).tail(p) = data.X.row(rows[i]);
        zv(i) = data.z(rows[i]);
        n1 += data.z(rows[i]);
    }
    if (n1 == 0 || n1 == m) throw std::invalid_argument("fit_logistic_ps: both arms required");

    PsFit fit;
    VectorXd beta = VectorXd::Zero(p + 1);
    for (int it = 0; it < 200; ++it) {
        fit.iterations = it + 1;
        const VectorXd eta = (D * beta).cwiseMax(-30.0).cwiseMin(30.0);
        const VectorXd mu = (1.0 / (1.0 + (-eta.array()).exp())).matrix();
        const VectorXd s = (mu.array() * (1.0 - mu.array())).max(1e-12).matrix();
        const VectorXd grad = D.transpose() * (zv - mu);
        MatrixXd H = D.transpose() * s.asDiagonal() * D;
        H.diagonal().array() += 1e-12;
        const VectorXd step = H.ldlt().solve(grad);
        beta += step;
        if (!beta.allFinite() || beta.cwiseAbs().maxCoeff() > 1e4) {
            fit.separated = true;
            break;
        }
        if (step.cwiseAbs().maxCoeff() < 1e-10) break;
    }
    fit.coef = beta;
    // complete separation: every unit classified with strict margin means the
    // likelihood increases along t*beta forever and the MLE does not exist
    if (!fit.separated) {
        const VectorXd eta_fit = D * beta;
        bool strict = true;
        for (int i = 0; i < m && strict; ++i)
            if ((2.0 * zv(i) - 1.0) * eta_fit(i) <= 0.0) strict = false;
        if (strict) fit.separated = true;
    }
    fit.e_hat = VectorXd::Constant(data.n(), 0.5);
    for (int i = 0; i < m; ++i) {
        double eta = beta(0) + data.X.row(rows[i]).dot(beta.tail(p).transpose());
        eta = std::clamp(eta, -30.0, 30.0);
        fit.e_hat(rows[i]) = std::clamp(1.0 / (1.0 + std::exp(-eta)), 0.001, 0.999);
    }
    return fit;
}

namespace {

double hajek(const Dataset& data, const VectorXd& w) {
    if (!data.y) throw std::invalid_argument("ipw estimator: outcomes required");
    double s1 = 0, s0 = 0, y1 = 0, y0 = 0;
    for (int i = 0; i < data.n(); ++i) {
        if (!data.is_analysis(i)) continue;
        if (data.z(i) == 1) {
            s1 += w(i);
            y1 += w(i) * (*data.y)(i);
        } else {
            s0 += w(i);
            y0 += w(i) * (*data.y)(i);
        }
    }
    if (s1 <= 0 || s0 <= 0) throw std::invalid_argument("ipw estimator: an arm has no weight");
    return y1 / s1 - y0 / s0;
}

}  // namespace

double ipw_ate(const Dataset& data, const VectorXd& e_hat) {
    VectorXd w(data.n());
    for (int i = 0; i < data.n(); ++i)
        w(i) = data.z(i) == 1 ? 1.0 / e_hat(i) : 1.0 / (1.0 - e_hat(i));
    return hajek(data, w);
}

double ipw_ato(const Dataset& data, const VectorXd& e_hat) {
    VectorXd w(data.n());
    for (int i = 0; i < data.n(); ++i)
        w(i) = data.z(i) == 1 ? 1.0 - e_hat(i) : e_hat(i);
    return hajek(data, w);
}

namespace {

// One arm of the fully anchored dual: f(a) = (1/m) sum_{i in arm} -rho(a'c_i)
// + a'c_target, minimized with delta * l1 on the non-intercept coordinates by
// FISTA with backtracking and restart.
constexpr int kMaxFistaIter = 10000;

VectorXd fista_arm(const MatrixXd& Carm, const VectorXd& c_target, int m, const Dispersion& d,
                   double delta) {
    const int K = static_cast<int>(c_target.size());
    auto fval = [&](const VectorXd& a) {
        const VectorXd eta = Carm * a;
        double acc = 0;
        for (int i = 0; i < eta.size(); ++i) acc -= rho(d, eta(i));
        return acc / m + a.dot(c_target);
    };
    auto grad = [&](const VectorXd& a) {
        const VectorXd eta = Carm * a;
        VectorXd wts(eta.size());
        for (int i = 0; i < eta.size(); ++i) wts(i) = rho_prime(d, eta(i));
        return (c_target - Carm.transpose() * wts / m).eval();
    };
    auto prox = [&](VectorXd v, double t) {
        for (int k = 1; k < K; ++k) {  // intercept unpenalized
            const double thr = t * delta;
            v(k) = v(k) > thr ? v(k) - thr : (v(k) < -thr ? v(k) + thr : 0.0);
        }
        return v;
    };

    VectorXd x = VectorXd::Zero(K), yv = x;
    double t = 1.0, momentum = 1.0;
    double fx = fval(x);
    double res_checkpoint = std::numeric_limits<double>::infinity();
    for (int it = 0; it < kMaxFistaIter; ++it) {
        if (it % 500 == 499) {
            // hopelessness check: if the balance residual is still above the
            // slack and its current rate of improvement cannot close the gap
            // within the remaining budget, this level is unattainable (the
            // penalized dual has no minimizer) -- stop grinding
            const double res = grad(x).cwiseAbs().maxCoeff();
            if (res > delta + 1e-6 && std::isfinite(res_checkpoint)) {
                const double rate = (res_checkpoint - res) / 500.0;
                if (rate <= 0.0 || (res - delta) / rate > double(kMaxFistaIter - it)) break;
            }
            res_checkpoint = res;
        }
        const VectorXd gy = grad(yv);
        const double fy = fval(yv);
        VectorXd xn;
        // backtracking on the smooth majorizer
        for (int bt = 0; bt < 60; ++bt) {
            xn = prox(yv - t * gy, t);
            const VectorXd diff = xn - yv;
            if (fval(xn) <= fy + gy.dot(diff) + diff.squaredNorm() / (2.0 * t) + 1e-15) break;
            t *= 0.5;
        }
        const double fxn = fval(xn);
        if (fxn > fx) {  // restart acceleration on non-monotone step
            yv = x;
            momentum = 1.0;
            continue;
        }
        const double step_inf = (xn - x).cwiseAbs().maxCoeff() / std::max(t, 1e-300);
        const double mn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
        yv = xn + ((momentum - 1.0) / mn) * (xn - x);
        x = xn;
        fx = fxn;
        momentum = mn;
        t = std::min(t * 2.0, 1e6);  // let the step size recover
        if (step_inf <= 1e-10) break;
        // an unattainable slack level sends the dual to -inf along a ray;
        // bail out once the iterate is clearly running away
        if (x.cwiseAbs().maxCoeff() > 1e3) break;
    }
    return x;
}

}  // namespace

WeightSolution minimal_weights(const Dataset& data, const EstimandSpec& est, const Dispersion& d,
                               double delta) {
    if (delta < 0) throw std::invalid_argument("minimal_weights: delta must be >= 0");
    const BalancePartition part = BalancePartition::all_in_c(data.p());
    const ConstraintSystem sys = build_system(data, part, est);

    // split analysis rows by arm
    std::vector<int> arm1, arm0;
    for (int i = 0; i < sys.m; ++i) (sys.z(i) == 1 ? arm1 : arm0).push_back(i);
    MatrixXd C1(static_cast<Eigen::Index>(arm1.size()), sys.K);
    MatrixXd C0(static_cast<Eigen::Index>(arm0.size()), sys.K);
    for (size_t k = 0; k < arm1.size(); ++k) C1.row(static_cast<Eigen::Index>(k)) = sys.C.row(arm1[k]);
    for (size_t k = 0; k < arm0.size(); ++k) C0.row(static_cast<Eigen::Index>(k)) = sys.C.row(arm0[k]);

    const VectorXd a1 = fista_arm(C1, sys.c_target, sys.m, d, delta);
    const VectorXd a0 = fista_arm(C0, sys.c_target, sys.m, d, delta);

    WeightSolution ws;
    ws.analysis_idx = sys.analysis_idx;
    ws.m = sys.m;
    ws.w = VectorXd::Zero(std::max(sys.n_total, sys.m));
    for (int i = 0; i < sys.m; ++i) {
        const double eta = sys.C.row(i).dot(sys.z(i) == 1 ? a1 : a0);
        ws.w(sys.analysis_idx[i]) = rho_prime(d, eta);
    }
    ws.balance_residuals_std = sys.residuals_std(ws.w);
    ws.balance_residuals = sys.residuals_orig(ws.w);
    ws.feasible = ws.max_abs_residual_std() <= delta + 1e-6;
    ws.target_profile_g = VectorXd(0);
    double s1 = 0, q1 = 0, s0 = 0, q0 = 0;
    for (int i = 0; i < sys.m; ++i) {
        const double wi = ws.w(sys.analysis_idx[i]);
        if (sys.z(i) == 1) {
            s1 += wi;
            q1 += wi * wi;
        } else {
            s0 += wi;
            q0 += wi * wi;
        }
    }
    ws.ess_treated = q1 > 0 ? s1 * s1 / q1 : 0.0;
    ws.ess_control = q0 > 0 ? s0 * s0 / q0 : 0.0;
    return ws;
}

}  // namespace prtbw
