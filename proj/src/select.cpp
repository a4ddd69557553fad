#include "prtbw/select.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "prtbw/rng.hpp"

namespace prtbw {

VectorXd average_ranks(const VectorXd& v) {
    const int n = static_cast<int>(v.size());
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return v(a) < v(b); });
    VectorXd ranks(n);
    int i = 0;
    while (i < n) {
        int j = i;
        while (j + 1 < n && v(order[j + 1]) == v(order[i])) ++j;
        const double avg = 0.5 * (i + j) + 1.0;  // mean of 1-based positions i+1..j+1
        for (int k = i; k <= j; ++k) ranks(order[k]) = avg;
        i = j + 1;
    }
    return ranks;
}

namespace {

std::vector<int> analysis_rows(const Dataset& data) {
    std::vector<int> rows;
    for (int i = 0; i < data.n(); ++i)
        if (data.is_analysis(i)) rows.push_back(i);
    return rows;
}

double pearson(const VectorXd& a, const VectorXd& b) {
    const double ma = a.mean(), mb = b.mean();
    const VectorXd da = a.array() - ma, db = b.array() - mb;
    const double denom = std::sqrt(da.squaredNorm() * db.squaredNorm());
    return denom > 0 ? da.dot(db) / denom : 0.0;
}

// least-squares residual of y on [1, X]
VectorXd ls_residual(const VectorXd& y, const MatrixXd& X) {
    MatrixXd D(y.size(), X.cols() + 1);
    D.col(0).setOnes();
    if (X.cols() > 0) D.rightCols(X.cols()) = X;
    VectorXd beta = D.colPivHouseholderQr().solve(y);
    return y - D * beta;
}

}  // namespace

std::vector<double> spearman_semipartial(const Dataset& data,
                                         const std::vector<int>& candidates) {
    const std::vector<int> rows = analysis_rows(data);
    const int m = static_cast<int>(rows.size());
    const int q = static_cast<int>(candidates.size());

    VectorXd zv(m);
    for (int i = 0; i < m; ++i) zv(i) = data.z(rows[i]);
    const VectorXd rz = average_ranks(zv);

    MatrixXd R(m, q);  // rank-transformed candidate columns
    std::vector<bool> constant(q, false);
    for (int c = 0; c < q; ++c) {
        VectorXd col(m);
        for (int i = 0; i < m; ++i) col(i) = data.X(rows[i], candidates[c]);
        constant[c] = (col.maxCoeff() == col.minCoeff());
        R.col(c) = average_ranks(col);
    }

    std::vector<double> metric(q, 0.0);
    for (int c = 0; c < q; ++c) {
        if (constant[c]) continue;  // degenerate, scores 0
        MatrixXd others(m, q - 1);
        for (int k = 0, t = 0; k < q; ++k)
            if (k != c) others.col(t++) = R.col(k);
        const VectorXd resid = ls_residual(R.col(c), others);
        // a numerically-zero residual (duplicated columns) carries no signal
        if (resid.norm() <= 1e-8 * R.col(c).norm()) continue;
        metric[c] = std::abs(pearson(rz, resid));
    }
    return metric;
}

std::vector<double> tem_scores(const Dataset& data, const NuisanceFit& nuis,
                               const std::vector<int>& candidates) {
    if (!data.y) throw std::invalid_argument("tem_scores: outcomes required");
    const std::vector<int> rows = analysis_rows(data);
    std::vector<double> metric(candidates.size(), 0.0);
    for (size_t c = 0; c < candidates.size(); ++c) {
        const int j = candidates[c];
        double num = 0.0, den = 0.0;
        for (int i : rows) {
            const double x = data.X(i, j);
            const double z = data.z(i);
            const double mu_z = z == 1 ? nuis.mu1_hat(i) : nuis.mu0_hat(i);
            const double e = nuis.e_hat(i);
            const double ipw = (2.0 * z - 1.0) / (z * e + (1.0 - z) * (1.0 - e));
            num += x * (((*data.y)(i)-mu_z) * ipw + nuis.mu1_hat(i) - nuis.mu0_hat(i));
            den += x * x;
        }
        metric[c] = den > 0 ? std::abs(num / den)
                            : std::numeric_limits<double>::quiet_NaN();  // skipped
    }
    return metric;
}

namespace {

// Ridge linear regression with unpenalized intercept; returns coefficient
// vector (intercept first).
VectorXd ridge_fit(const MatrixXd& X, const VectorXd& y, double lambda) {
    const int p = static_cast<int>(X.cols());
    MatrixXd D(X.rows(), p + 1);
    D.col(0).setOnes();
    D.rightCols(p) = X;
    MatrixXd A = D.transpose() * D;
    for (int j = 1; j <= p; ++j) A(j, j) += lambda;
    return A.ldlt().solve(D.transpose() * y);
}

double ridge_predict(const VectorXd& beta, const Eigen::RowVectorXd& x) {
    return beta(0) + x.dot(beta.tail(beta.size() - 1).transpose());
}

// Ridge-penalized logistic regression by IRLS (intercept unpenalized).
VectorXd logistic_ridge_fit(const MatrixXd& X, const VectorXd& z, double lambda,
                            int max_iter = 100) {
    const int p = static_cast<int>(X.cols());
    MatrixXd D(X.rows(), p + 1);
    D.col(0).setOnes();
    D.rightCols(p) = X;
    VectorXd beta = VectorXd::Zero(p + 1);
    for (int it = 0; it < max_iter; ++it) {
        const VectorXd eta = D * beta;
        const VectorXd mu = (1.0 / (1.0 + (-eta.array()).exp())).matrix();
        const VectorXd s = mu.array() * (1.0 - mu.array()) + 1e-10;
        VectorXd grad = D.transpose() * (z - mu);
        MatrixXd H = D.transpose() * s.asDiagonal() * D;
        for (int j = 1; j <= p; ++j) {
            grad(j) -= lambda * beta(j);
            H(j, j) += lambda;
        }
        const VectorXd step = H.ldlt().solve(grad);
        beta += step;
        if (step.cwiseAbs().maxCoeff() < 1e-10) break;
        if (!beta.allFinite() || beta.cwiseAbs().maxCoeff() > 1e8) break;  // saturated
    }
    return beta;
}

// Pick a ridge penalty from the fixed grid on a held-out slice of the
// training rows; ties break to the largest penalty.
const double kRidgeGrid[] = {1e-4, 1e-2, 1.0};

double pick_ridge_linear(const MatrixXd& X, const VectorXd& y) {
    const int n = static_cast<int>(X.rows());
    const int nh = std::max(1, n / 4);  // last quarter held out (rows pre-shuffled)
    const MatrixXd Xt = X.topRows(n - nh);
    const VectorXd yt = y.head(n - nh);
    double best = kRidgeGrid[2], best_err = std::numeric_limits<double>::infinity();
    for (double lam : kRidgeGrid) {
        const VectorXd beta = ridge_fit(Xt, yt, lam);
        double err = 0;
        for (int i = n - nh; i < n; ++i) {
            const double d = y(i) - ridge_predict(beta, X.row(i));
            err += d * d;
        }
        if (err < best_err - 1e-12) {
            best_err = err;
            best = lam;
        }
    }
    return best;
}

double pick_ridge_logistic(const MatrixXd& X, const VectorXd& z) {
    const int n = static_cast<int>(X.rows());
    const int nh = std::max(1, n / 4);
    const MatrixXd Xt = X.topRows(n - nh);
    const VectorXd zt = z.head(n - nh);
    double best = kRidgeGrid[2], best_err = std::numeric_limits<double>::infinity();
    for (double lam : kRidgeGrid) {
        // guard against degenerate training slices (one-arm holdout etc.)
        if (zt.minCoeff() == zt.maxCoeff()) return kRidgeGrid[2];
        const VectorXd beta = logistic_ridge_fit(Xt, zt, lam);
        double nll = 0;
        for (int i = n - nh; i < n; ++i) {
            double eta = beta(0) + X.row(i).dot(beta.tail(beta.size() - 1).transpose());
            eta = std::clamp(eta, -30.0, 30.0);
            const double mu = 1.0 / (1.0 + std::exp(-eta));
            nll -= z(i) * std::log(mu) + (1.0 - z(i)) * std::log(1.0 - mu);
        }
        if (nll < best_err - 1e-12) {
            best_err = nll;
            best = lam;
        }
    }
    return best;
}

}  // namespace

NuisanceFit fit_nuisances(const Dataset& data, int folds, std::uint64_t seed) {
    if (!data.y) throw std::invalid_argument("fit_nuisances: outcomes required");
    if (folds < 2) throw std::invalid_argument("fit_nuisances: folds must be >= 2");
    const std::vector<int> rows = analysis_rows(data);
    const int m = static_cast<int>(rows.size());

    // arm-stratified fold assignment from a seeded shuffle
    std::vector<int> treated, control;
    for (int i : rows) (data.z(i) == 1 ? treated : control).push_back(i);
    if (static_cast<int>(treated.size()) < folds || static_cast<int>(control.size()) < folds)
        throw std::invalid_argument("fit_nuisances: an arm has fewer units than folds");
    RngStream rng(seed, 0xF01D);
    auto shuffle = [&](std::vector<int>& v) {
        for (size_t i = v.size(); i > 1; --i)
            std::swap(v[i - 1], v[rng.below(i)]);
    };
    shuffle(treated);
    shuffle(control);

    NuisanceFit fit;
    fit.mu0_hat = VectorXd::Zero(data.n());
    fit.mu1_hat = VectorXd::Zero(data.n());
    fit.e_hat = VectorXd::Constant(data.n(), 0.5);
    fit.fold_id = VectorXi::Constant(data.n(), -1);
    for (size_t k = 0; k < treated.size(); ++k) fit.fold_id(treated[k]) = static_cast<int>(k % folds);
    for (size_t k = 0; k < control.size(); ++k) fit.fold_id(control[k]) = static_cast<int>(k % folds);

    for (int f = 0; f < folds; ++f) {
        std::vector<int> train, test;
        for (int i : rows) (fit.fold_id(i) == f ? test : train).push_back(i);
        // shuffle training rows so the grid-selection holdout slice is random
        shuffle(train);

        std::vector<int> tr1, tr0;
        for (int i : train) (data.z(i) == 1 ? tr1 : tr0).push_back(i);
        auto design = [&](const std::vector<int>& idx, MatrixXd& X, VectorXd& y, VectorXd* zv) {
            X.resize(static_cast<Eigen::Index>(idx.size()), data.p());
            y.resize(static_cast<Eigen::Index>(idx.size()));
            if (zv) zv->resize(static_cast<Eigen::Index>(idx.size()));
            for (size_t t = 0; t < idx.size(); ++t) {
                X.row(static_cast<Eigen::Index>(t)) = data.X.row(idx[t]);
                y(static_cast<Eigen::Index>(t)) = (*data.y)(idx[t]);
                if (zv) (*zv)(static_cast<Eigen::Index>(t)) = data.z(idx[t]);
            }
        };
        MatrixXd X1, X0, Xa;
        VectorXd y1, y0, ya, za;
        design(tr1, X1, y1, nullptr);
        design(tr0, X0, y0, nullptr);
        design(train, Xa, ya, &za);

        const VectorXd b1 = ridge_fit(X1, y1, pick_ridge_linear(X1, y1));
        const VectorXd b0 = ridge_fit(X0, y0, pick_ridge_linear(X0, y0));
        const VectorXd be = logistic_ridge_fit(Xa, za, pick_ridge_logistic(Xa, za));
        for (int i : test) {
            fit.mu1_hat(i) = ridge_predict(b1, data.X.row(i));
            fit.mu0_hat(i) = ridge_predict(b0, data.X.row(i));
            double eta = be(0) + data.X.row(i).dot(be.tail(be.size() - 1).transpose());
            eta = std::clamp(eta, -30.0, 30.0);
            fit.e_hat(i) = std::clamp(1.0 / (1.0 + std::exp(-eta)), 0.01, 0.99);
        }
    }
    (void)m;
    return fit;
}

namespace {

bool system_feasible(const Dataset& data, const BalancePartition& part, const EstimandSpec& est) {
    const ConstraintSystem sys = build_system(data, part, est);
    return check_feasibility(sys).verdict == FeasVerdict::Feasible;
}

SelectionResult run_selection(const Dataset& data, const BalancePartition& part0,
                              const EstimandSpec& est, const Dispersion& d, MetricKind metric,
                              const SolverConfig& cfg, std::uint64_t seed, bool adaptive) {
    part0.validate(data.p());
    SelectionResult res;
    res.g_idx = part0.g_idx;
    std::vector<int> remaining = part0.c_idx;

    std::optional<NuisanceFit> nuis;
    if (metric == MetricKind::Model) nuis = fit_nuisances(data, 2, seed);

    // Static mode freezes the candidate order from the initial metric ranking.
    std::optional<std::vector<int>> frozen_order;
    if (!adaptive && !remaining.empty()) {
        std::vector<double> v = metric == MetricKind::Design
                                    ? spearman_semipartial(data, remaining)
                                    : tem_scores(data, *nuis, remaining);
        std::vector<int> order(remaining.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            const bool na = std::isnan(v[a]), nb = std::isnan(v[b]);
            if (na != nb) return nb;  // skipped candidates sort last
            return metric == MetricKind::Design ? v[a] > v[b] : v[a] < v[b];
        });
        frozen_order.emplace();
        for (int k : order) frozen_order->push_back(remaining[k]);
        MetricStep step0;
        step0.candidates = remaining;
        step0.values = v;
        res.metric_trace.push_back(step0);
    }
    size_t frozen_pos = 0;

    BalancePartition part = part0;
    while (!system_feasible(data, part, est)) {
        if (remaining.empty())
            throw std::runtime_error(
                "relaxed positivity fails: infeasible with every column retargeted");
        int chosen;
        if (adaptive) {
            std::vector<double> v = metric == MetricKind::Design
                                        ? spearman_semipartial(data, remaining)
                                        : tem_scores(data, *nuis, remaining);
            int best = -1;
            for (size_t k = 0; k < v.size(); ++k) {
                if (std::isnan(v[k])) continue;
                if (best < 0 ||
                    (metric == MetricKind::Design ? v[k] > v[best] : v[k] < v[best]))
                    best = static_cast<int>(k);
            }
            if (best < 0) best = 0;  // all skipped: fall back to first
            chosen = remaining[best];
            MetricStep step;
            step.candidates = remaining;
            step.values = v;
            step.chosen = chosen;
            res.metric_trace.push_back(step);
        } else {
            chosen = (*frozen_order)[frozen_pos++];
            if (!res.metric_trace.empty() && res.metric_trace.size() == 1)
                res.metric_trace[0].chosen = chosen;  // first move recorded on the frozen step
        }
        res.g_idx.push_back(chosen);
        remaining.erase(std::find(remaining.begin(), remaining.end(), chosen));
        part = BalancePartition{remaining, res.g_idx};
        ++res.steps;
    }

    SolveResult sr = solve_weights(data, part, est, d, cfg);
    if (sr.dual.status != SolveStatus::Converged)
        throw std::runtime_error("selection: system feasible by LP but dual solve failed");
    res.final_weights = sr.weights;
    return res;
}

}  // namespace

SelectionResult select_g_adaptive(const Dataset& data, const BalancePartition& part0,
                                  const EstimandSpec& est, const Dispersion& d, MetricKind metric,
                                  const SolverConfig& cfg, std::uint64_t seed) {
    return run_selection(data, part0, est, d, metric, cfg, seed, true);
}

SelectionResult select_g_static(const Dataset& data, const BalancePartition& part0,
                                const EstimandSpec& est, const Dispersion& d, MetricKind metric,
                                const SolverConfig& cfg, std::uint64_t seed) {
    return run_selection(data, part0, est, d, metric, cfg, seed, false);
}

BalancePartition rare_binary_preseed(const Dataset& data, double threshold) {
    std::vector<int> g;
    for (int j = 0; j < data.p(); ++j) {
        bool binary = true;
        double sum = 0;
        int m = 0;
        for (int i = 0; i < data.n(); ++i) {
            if (!data.is_analysis(i)) continue;
            const double x = data.X(i, j);
            if (x != 0.0 && x != 1.0) {
                binary = false;
                break;
            }
            sum += x;
            ++m;
        }
        if (!binary || m == 0) continue;
        const double prev = sum / m;
        if (std::min(prev, 1.0 - prev) < threshold) g.push_back(j);
    }
    return BalancePartition::with_g(data.p(), std::move(g));
}

}  // namespace prtbw
