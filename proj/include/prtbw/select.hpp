#ifndef PRTBW_SELECT_HPP
#define PRTBW_SELECT_HPP

#include "prtbw/solver.hpp"

namespace prtbw {

enum class MetricKind { Design, Model };

// Cross-fitted nuisance predictions used by the model-based metric.
struct NuisanceFit {
    VectorXd mu0_hat;
    VectorXd mu1_hat;
    VectorXd e_hat;  // clipped to [0.01, 0.99]
    VectorXi fold_id;
};

struct MetricStep {
    std::vector<int> candidates;  // remaining candidates at this step
    std::vector<double> values;   // metric per candidate (NaN = skipped)
    int chosen = -1;              // column moved into g
};

struct SelectionResult {
    std::vector<int> g_idx;  // selection order preserved (seeded columns first)
    std::vector<MetricStep> metric_trace;
    int steps = 0;
    WeightSolution final_weights;
};

// Average-rank transform (ties get the mean rank), 1-based ranks.
VectorXd average_ranks(const VectorXd& v);

// Design-based metric: rank everything, residualize each candidate's ranks on
// the ranks of the other candidates (least squares with intercept), report
// |corr(rank(Z), residual)|. Constant columns score 0.
std::vector<double> spearman_semipartial(const Dataset& data, const std::vector<int>& candidates);

// Model-based metric: one-step doubly robust treatment-effect-modification
// score per candidate; all-zero columns get NaN (skipped).
std::vector<double> tem_scores(const Dataset& data, const NuisanceFit& nuis,
                               const std::vector<int>& candidates);

// Cross-fitted ridge outcome models (per arm) and ridge logistic propensity,
// folds stratified by arm; ridge penalty picked per fit from {1e-4, 1e-2, 1}
// by held-out validation inside the training folds (ties -> largest penalty).
NuisanceFit fit_nuisances(const Dataset& data, int folds, std::uint64_t seed = 0);

// Greedy retargeting-set search. Each step the metric is recomputed over the
// remaining candidates; the arg-max (Design) / arg-min (Model) moves into g;
// stop at the first feasible system. Throws std::runtime_error when every
// column has been moved and the system is still infeasible.
SelectionResult select_g_adaptive(const Dataset& data, const BalancePartition& part0,
                                  const EstimandSpec& est, const Dispersion& d,
                                  MetricKind metric, const SolverConfig& cfg = {},
                                  std::uint64_t seed = 0);

// Static variant: metric computed once, candidate order frozen.
SelectionResult select_g_static(const Dataset& data, const BalancePartition& part0,
                                const EstimandSpec& est, const Dispersion& d, MetricKind metric,
                                const SolverConfig& cfg = {}, std::uint64_t seed = 0);

// Binary columns rarer than the threshold (on the analysis sample) make a
// natural initial g set; returns a partition seeding them.
BalancePartition rare_binary_preseed(const Dataset& data, double threshold = 0.05);

}  // namespace prtbw

#endif
