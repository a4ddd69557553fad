#include "prtbw/solver.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>

namespace prtbw {

namespace {
constexpr double kArmijoC = 1e-4;
constexpr double kBacktrack = 0.5;
}  // namespace

DualSolution solve_dual(const DualObjective& obj, const SolverConfig& cfg,
                        const std::optional<VectorXd>& init) {
    const int dim = obj.dim();
    const int K = obj.system().K, L = obj.system().L;
    VectorXd theta = init ? *init : VectorXd::Zero(dim);

    DualSolution sol;
    auto pack = [&](SolveStatus status, double gnorm, int iter, double f) {
        sol.alpha0 = theta.head(K);
        sol.alpha1 = theta.segment(K, K);
        sol.gamma = theta.tail(L);
        sol.status = status;
        sol.grad_inf_norm = gnorm;
        sol.iterations = iter;
        sol.loss = f;
        return sol;
    };

    double f = obj.loss(theta);
    if (!std::isfinite(f)) throw std::runtime_error("dual loss non-finite at start");

    for (int iter = 0; iter < cfg.max_iter; ++iter) {
        VectorXd grad = obj.gradient(theta);
        if (!grad.allFinite()) throw std::runtime_error("dual gradient non-finite");
        const double gnorm = grad.cwiseAbs().maxCoeff();
        if (gnorm <= cfg.tol_balance) return pack(SolveStatus::Converged, gnorm, iter, f);
        if (theta.cwiseAbs().maxCoeff() > cfg.theta_max)
            return pack(SolveStatus::Infeasible, gnorm, iter, f);

        MatrixXd H = obj.hessian(theta);
        H.diagonal().array() += cfg.ridge;
        Eigen::LDLT<MatrixXd> ldlt(H);
        VectorXd dir;
        bool ok = ldlt.info() == Eigen::Success;
        if (ok) {
            dir = ldlt.solve(-grad);
            ok = dir.allFinite() && grad.dot(dir) < 0.0;
        }
        if (!ok) dir = -grad;  // gradient fallback

        const double slope = grad.dot(dir);

        // When the predicted decrease is below the floating-point resolution
        // of the loss, Armijo can neither accept nor reject meaningfully:
        // backtracked micro-steps get accepted on rounding noise and the
        // iteration stalls. Switch to gradient-norm acceptance on the full
        // step, which Newton shrinks quadratically this close to the optimum.
        if (std::abs(slope) <= 1e-12 * std::max(1.0, std::abs(f))) {
            const VectorXd theta_full = theta + dir;
            const VectorXd g_full = obj.gradient(theta_full);
            if (g_full.allFinite() && g_full.cwiseAbs().maxCoeff() < gnorm) {
                theta = theta_full;
                f = obj.loss(theta);
                continue;
            }
            return pack(gnorm <= cfg.tol_balance ? SolveStatus::Converged : SolveStatus::IterLimit,
                        gnorm, iter, f);
        }

        // Armijo backtracking; non-finite trial losses are treated as ascent
        double step = 1.0;
        double f_new = f;
        VectorXd theta_new;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            theta_new = theta + step * dir;
            f_new = obj.loss(theta_new);
            if (std::isfinite(f_new) && f_new <= f + kArmijoC * step * slope) {
                accepted = true;
                break;
            }
            step *= kBacktrack;
        }
        if (!accepted) {
            // Near the optimum the loss is flat to machine precision and the
            // sufficient-decrease test cannot certify anything; fall back to
            // plain gradient-norm descent on the full Newton step.
            theta_new = theta + dir;
            const VectorXd g_new = obj.gradient(theta_new);
            if (g_new.allFinite() && g_new.cwiseAbs().maxCoeff() < gnorm) {
                theta = theta_new;
                f = obj.loss(theta);
                continue;
            }
            return pack(gnorm <= cfg.tol_balance ? SolveStatus::Converged : SolveStatus::IterLimit,
                        gnorm, iter, f);
        }
        theta = theta_new;
        f = f_new;
    }
    const double gnorm = obj.gradient(theta).cwiseAbs().maxCoeff();
    if (theta.cwiseAbs().maxCoeff() > cfg.theta_max)
        return pack(SolveStatus::Infeasible, gnorm, cfg.max_iter, f);
    return pack(gnorm <= cfg.tol_balance ? SolveStatus::Converged : SolveStatus::IterLimit, gnorm,
                cfg.max_iter, f);
}

WeightSolution recover_weights(const DualSolution& sol, const ConstraintSystem& sys,
                               const Dispersion& d, double tol_balance) {
    if (sol.status != SolveStatus::Converged)
        throw std::logic_error("recover_weights requires a converged dual solution");

    WeightSolution ws;
    ws.analysis_idx = sys.analysis_idx;
    ws.m = sys.m;

    ws.w = VectorXd::Zero(std::max(sys.n_total, sys.m));

    VectorXd theta(2 * sys.K + sys.L);
    theta << sol.alpha0, sol.alpha1, sol.gamma;
    DualObjective obj(sys, d);
    const VectorXd wa = obj.weights(theta);
    for (int a = 0; a < sys.m; ++a) ws.w(sys.analysis_idx[a]) = wa(a);

    ws.balance_residuals_std = sys.residuals_std(ws.w);
    ws.balance_residuals = sys.residuals_orig(ws.w);
    ws.feasible = ws.balance_residuals_std.cwiseAbs().maxCoeff() <= tol_balance;

    // achieved common g mean (treated side; equals control side at optimum),
    // reported on the original scale
    ws.target_profile_g = VectorXd::Zero(sys.L);
    double sw1 = 0.0, sq1 = 0.0, sw0 = 0.0, sq0 = 0.0;
    for (int a = 0; a < sys.m; ++a) {
        const double w = wa(a);
        if (sys.z(a) == 1) {
            sw1 += w;
            sq1 += w * w;
            for (int l = 0; l < sys.L; ++l)
                ws.target_profile_g(l) += w * (sys.G(a, l) * sys.g_scale(l) + sys.g_center(l));
        } else {
            sw0 += w;
            sq0 += w * w;
        }
    }
    if (sys.L > 0) ws.target_profile_g /= static_cast<double>(sys.m);
    ws.ess_treated = sq1 > 0 ? sw1 * sw1 / sq1 : 0.0;
    ws.ess_control = sq0 > 0 ? sw0 * sw0 / sq0 : 0.0;
    return ws;
}

namespace {

// Phase-1 simplex, dense tableau, Bland's rule. Minimizes the sum of
// artificial variables for {A w = b, w >= 0}.
struct Phase1Result {
    double objective = 0.0;
    VectorXd witness;
    int worst_row = -1;
    bool stalled = false;
};

Phase1Result phase1_simplex(MatrixXd A, VectorXd b) {
    const int r = static_cast<int>(A.rows());
    const int n = static_cast<int>(A.cols());
    for (int i = 0; i < r; ++i)
        if (b(i) < 0) {
            A.row(i) = -A.row(i);
            b(i) = -b(i);
        }

    // tableau: [A | I | b], basis = artificials n..n+r-1
    MatrixXd T(r + 1, n + r + 1);
    T.setZero();
    T.block(0, 0, r, n) = A;
    T.block(0, n, r, r) = MatrixXd::Identity(r, r);
    T.block(0, n + r, r, 1) = b;
    // objective row: minimize sum of artificials => reduced costs after
    // pricing the basic artificial columns out of the cost vector
    for (int i = 0; i < r; ++i) T(r, n + i) = 1.0;
    for (int i = 0; i < r; ++i) T.row(r) -= T.row(i);

    std::vector<int> basis(r);
    for (int i = 0; i < r; ++i) basis[i] = n + i;

    const double eps = 1e-11;
    const long max_pivots = 2000L + 40L * static_cast<long>(n + r);
    long pivots = 0;
    while (true) {
        // Bland: entering = lowest-index structural column with negative
        // reduced cost (artificials never re-enter)
        int enter = -1;
        for (int j = 0; j < n; ++j)
            if (T(r, j) < -eps) {
                enter = j;
                break;
            }
        if (enter < 0) break;
        int leave = -1;
        double best = 0.0;
        for (int i = 0; i < r; ++i) {
            if (T(i, enter) > eps) {
                const double ratio = T(i, n + r) / T(i, enter);
                if (leave < 0 || ratio < best - 1e-15 ||
                    (std::abs(ratio - best) <= 1e-15 && basis[i] < basis[leave])) {
                    leave = i;
                    best = ratio;
                }
            }
        }
        if (leave < 0) break;  // unbounded cannot happen in phase 1; bail defensively
        T.row(leave) /= T(leave, enter);
        for (int i = 0; i <= r; ++i) {
            if (i == leave) continue;
            const double f = T(i, enter);
            if (f != 0.0) T.row(i) -= f * T.row(leave);
        }
        basis[leave] = enter;
        if (++pivots > max_pivots) {
            Phase1Result res;
            res.stalled = true;
            return res;
        }
    }

    Phase1Result res;
    res.objective = -T(r, n + r);
    res.witness = VectorXd::Zero(n);
    double worst = 0.0;
    for (int i = 0; i < r; ++i) {
        if (basis[i] < n)
            res.witness(basis[i]) = T(i, n + r);
        else if (T(i, n + r) > worst) {
            worst = T(i, n + r);
            res.worst_row = basis[i] - n;
        }
    }
    return res;
}

}  // namespace

Feasibility check_feasibility(const ConstraintSystem& sys) {
    MatrixXd A = sys.constraint_matrix();
    VectorXd b = sys.rhs();
    Feasibility out;

    // drop linearly dependent rows; an inconsistent dependent row means
    // infeasible outright
    Eigen::ColPivHouseholderQR<MatrixXd> qr(A.transpose());
    qr.setThreshold(1e-10);
    const int rank = static_cast<int>(qr.rank());
    if (rank < A.rows()) {
        // keep the pivot rows, verify the rest are consistent
        std::vector<int> keep;
        const auto& perm = qr.colsPermutation().indices();
        for (int i = 0; i < rank; ++i) keep.push_back(perm(i));
        std::sort(keep.begin(), keep.end());
        MatrixXd Ak(rank, A.cols());
        VectorXd bk(rank);
        for (int i = 0; i < rank; ++i) {
            Ak.row(i) = A.row(keep[i]);
            bk(i) = b(keep[i]);
        }
        // least-squares consistency check on the dropped rows
        VectorXd w_ls = Ak.colPivHouseholderQr().solve(bk);
        for (int i = 0; i < A.rows(); ++i) {
            bool kept = std::binary_search(keep.begin(), keep.end(), i);
            if (!kept && std::abs(A.row(i).dot(w_ls) - b(i)) > 1e-7) {
                out.verdict = FeasVerdict::Infeasible;
                out.violated_row = i;
                return out;
            }
        }
        out.dropped_rows = static_cast<int>(A.rows()) - rank;
        A = Ak;
        b = bk;
    }

    Phase1Result res = phase1_simplex(A, b);
    if (res.stalled) {
        out.verdict = FeasVerdict::Unknown;
        return out;
    }
    if (res.objective <= 1e-7) {
        out.verdict = FeasVerdict::Feasible;
        out.witness = res.witness;
    } else {
        out.verdict = FeasVerdict::Infeasible;
        out.violated_row = res.worst_row;
    }
    return out;
}

SolveResult solve_weights(const Dataset& data, const BalancePartition& part,
                          const EstimandSpec& est, const Dispersion& d, const SolverConfig& cfg) {
    ConstraintSystem sys = build_system(data, part, est);
    DualObjective obj(sys, d);
    SolveResult res;
    res.dual = solve_dual(obj, cfg);
    if (res.dual.status == SolveStatus::Converged)
        res.weights = recover_weights(res.dual, sys, d);
    return res;
}

}  // namespace prtbw
