#include "prtbw/estimate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

#include "prtbw/rng.hpp"

namespace prtbw {

namespace {
constexpr double kZ975 = 1.959964;
}

Dataset subset_rows(const Dataset& data, const std::vector<int>& rows) {
    Dataset out;
    const int n = static_cast<int>(rows.size());
    out.z.resize(n);
    out.X.resize(n, data.p());
    if (data.y) out.y = VectorXd(n);
    if (data.r) out.r = VectorXi(n);
    for (int i = 0; i < n; ++i) {
        out.z(i) = data.z(rows[i]);
        out.X.row(i) = data.X.row(rows[i]);
        if (data.y) (*out.y)(i) = (*data.y)(rows[i]);
        if (data.r) (*out.r)(i) = (*data.r)(rows[i]);
    }
    out.covariate_names = data.covariate_names;
    if (!data.unit_ids.empty()) {
        out.unit_ids.reserve(rows.size());
        for (int i : rows) out.unit_ids.push_back(data.unit_ids[i]);
    }
    return out;
}

double weighted_effect(const WeightSolution& w, const Dataset& data) {
    if (!data.y) throw std::invalid_argument("weighted_effect: outcomes required");
    double s1 = 0, s0 = 0;
    for (int i : w.analysis_idx) {
        const double wy = w.w(i) * (*data.y)(i);
        if (data.z(i) == 1)
            s1 += wy;
        else
            s0 += wy;
    }
    return (s1 - s0) / w.m;
}

CrossfitResult crossfit_effect(const Dataset& data, const EstimandSpec& est, const Dispersion& d,
                               const SolverConfig& cfg, int folds, std::uint64_t seed) {
    if (folds != 2) throw std::invalid_argument("crossfit_effect: only folds=2 supported");
    if (!data.y) throw std::invalid_argument("crossfit_effect: outcomes required");

    // arm-stratified seeded split
    std::vector<int> treated, control;
    for (int i = 0; i < data.n(); ++i)
        if (data.is_analysis(i)) (data.z(i) == 1 ? treated : control).push_back(i);
    if (treated.size() < 2 || control.size() < 2)
        throw std::invalid_argument("crossfit_effect: each arm needs >= 2 units");
    RngStream rng(seed, 0xCF17);
    auto shuffle = [&](std::vector<int>& v) {
        for (size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
    };
    shuffle(treated);
    shuffle(control);
    std::vector<int> fold1, fold2;
    for (size_t k = 0; k < treated.size(); ++k) (k % 2 == 0 ? fold1 : fold2).push_back(treated[k]);
    for (size_t k = 0; k < control.size(); ++k) (k % 2 == 0 ? fold1 : fold2).push_back(control[k]);
    std::sort(fold1.begin(), fold1.end());
    std::sort(fold2.begin(), fold2.end());

    const Dataset d1 = subset_rows(data, fold1);
    const Dataset d2 = subset_rows(data, fold2);

    // select on one fold (nuisances fit there too), estimate on the other
    auto estimate_fold = [&](const Dataset& select_on, const Dataset& apply_on,
                             std::vector<int>& g_out) {
        SelectionResult sel = select_g_adaptive(select_on, BalancePartition::all_in_c(data.p()),
                                                est, d, MetricKind::Model, cfg, seed);
        g_out = sel.g_idx;
        SolveResult sr =
            solve_weights(apply_on, BalancePartition::with_g(data.p(), sel.g_idx), est, d, cfg);
        if (sr.dual.status != SolveStatus::Converged)
            throw std::runtime_error("crossfit_effect: fold infeasible with selected g");
        return weighted_effect(sr.weights, apply_on);
    };

    CrossfitResult res;
    const double tau1 = estimate_fold(d2, d1, res.g_fold1);
    const double tau2 = estimate_fold(d1, d2, res.g_fold2);
    const double n1 = static_cast<double>(fold1.size());
    const double n2 = static_cast<double>(fold2.size());
    res.tau_hat = (n1 * tau1 + n2 * tau2) / (n1 + n2);
    return res;
}

EstimateReport bootstrap_ci(const Dataset& data,
                            const std::function<std::optional<double>(const Dataset&)>& pipeline,
                            const BootstrapOptions& opts) {
    if (opts.B < 50) throw std::invalid_argument("bootstrap_ci: B must be >= 50");
    EstimateReport rep;
    rep.boot_total = opts.B;
    rep.seed = opts.seed;

    const std::optional<double> full = pipeline(data);
    if (!full) throw std::runtime_error("bootstrap_ci: pipeline infeasible on the full data");
    rep.tau_hat = *full;

    // resampling strata: by population indicator when present, else all units
    std::vector<int> stratum1, stratum0;
    for (int i = 0; i < data.n(); ++i)
        (data.r && (*data.r)(i) == 0 ? stratum0 : stratum1).push_back(i);

    std::vector<double> est(opts.B, std::numeric_limits<double>::quiet_NaN());
    std::vector<char> ok(opts.B, 0);

    auto run_rep = [&](int b) {
        RngStream rng(opts.seed, static_cast<std::uint64_t>(b) + 1);
        std::vector<int> rows;
        rows.reserve(data.n());
        for (size_t k = 0; k < stratum1.size(); ++k)
            rows.push_back(stratum1[rng.below(stratum1.size())]);
        for (size_t k = 0; k < stratum0.size(); ++k)
            rows.push_back(stratum0[rng.below(stratum0.size())]);
        const Dataset boot = subset_rows(data, rows);
        std::optional<double> v;
        try {
            v = pipeline(boot);
        } catch (const std::exception&) {
            v = std::nullopt;
        }
        if (v && std::isfinite(*v)) {
            est[b] = *v;
            ok[b] = 1;
        }
    };

    const int nthreads = std::max(1, opts.threads);
    if (nthreads == 1) {
        for (int b = 0; b < opts.B; ++b) run_rep(b);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        for (int t = 0; t < nthreads; ++t)
            pool.emplace_back([&] {
                for (int b = next.fetch_add(1); b < opts.B; b = next.fetch_add(1)) run_rep(b);
            });
        for (auto& th : pool) th.join();
    }

    std::vector<double> good;
    good.reserve(opts.B);
    for (int b = 0; b < opts.B; ++b)
        if (ok[b]) good.push_back(est[b]);
    rep.boot_failed = opts.B - static_cast<int>(good.size());
    rep.ci_unreliable = rep.boot_failed * 2 > opts.B;

    if (good.size() >= 2) {
        const double mean = std::accumulate(good.begin(), good.end(), 0.0) / good.size();
        double ss = 0;
        for (double v : good) ss += (v - mean) * (v - mean);
        rep.se_boot = std::sqrt(ss / (good.size() - 1));
    } else {
        rep.se_boot = 0.0;
    }

    if (opts.percentile && good.size() >= 2) {
        std::sort(good.begin(), good.end());
        auto quantile = [&](double q) {
            const double pos = q * (good.size() - 1);
            const size_t lo = static_cast<size_t>(pos);
            const size_t hi = std::min(lo + 1, good.size() - 1);
            return good[lo] + (pos - lo) * (good[hi] - good[lo]);
        };
        rep.ci_low = quantile(0.025);
        rep.ci_high = quantile(0.975);
    } else {
        rep.ci_low = rep.tau_hat - kZ975 * rep.se_boot;
        rep.ci_high = rep.tau_hat + kZ975 * rep.se_boot;
    }
    return rep;
}

}  // namespace prtbw
