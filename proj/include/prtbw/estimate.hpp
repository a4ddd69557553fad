#ifndef PRTBW_ESTIMATE_HPP
#define PRTBW_ESTIMATE_HPP

#include <functional>

#include "prtbw/select.hpp"

namespace prtbw {

struct EstimateReport {
    double tau_hat = std::numeric_limits<double>::quiet_NaN();
    double se_boot = std::numeric_limits<double>::quiet_NaN();
    double ci_low = std::numeric_limits<double>::quiet_NaN();
    double ci_high = std::numeric_limits<double>::quiet_NaN();
    int boot_total = 0;
    int boot_failed = 0;
    bool ci_unreliable = false;  // more than half the replicates failed
    EstimandSpec estimand;
    std::vector<int> g_used;
    std::uint64_t seed = 0;
};

// Row-subset copy (keeps column names; reindexes h_values/r/y/z).
Dataset subset_rows(const Dataset& data, const std::vector<int>& rows);

// tau_hat = (1/m) sum w Z Y - (1/m) sum w (1-Z) Y over analysis units.
double weighted_effect(const WeightSolution& w, const Dataset& data);

struct CrossfitResult {
    double tau_hat = 0.0;
    std::vector<int> g_fold1;  // g selected on fold 2, applied to fold 1
    std::vector<int> g_fold2;
};

// Fold-swapped estimator: select g (model metric) on one fold, solve weights
// and estimate on the other, combine by fold size.
CrossfitResult crossfit_effect(const Dataset& data, const EstimandSpec& est, const Dispersion& d,
                               const SolverConfig& cfg, int folds = 2, std::uint64_t seed = 0);

struct BootstrapOptions {
    int B = 500;
    std::uint64_t seed = 0;
    int threads = 1;
    bool percentile = false;  // default is the Wald (normal) interval
};

// pipeline(dataset) returns the point estimate or nullopt when the replicate
// is infeasible. Resampling is stratified by the population indicator when
// present; replicate streams are counter-based so thread scheduling cannot
// change the result.
EstimateReport bootstrap_ci(const Dataset& data,
                            const std::function<std::optional<double>(const Dataset&)>& pipeline,
                            const BootstrapOptions& opts);

}  // namespace prtbw

#endif
