#ifndef PRTBW_SIMLAB_HPP
#define PRTBW_SIMLAB_HPP

#include <functional>

#include "prtbw/solver.hpp"

namespace prtbw {

// Synthetic-study configuration. gamma scales down the propensity slopes
// (smaller gamma = more extreme propensities = less overlap); delta_het
// scales treatment-effect heterogeneity; theta is the fraction of covariates
// that modify the effect.
struct ScenarioConfig {
    int p = 20;
    double pct_treated = 0.20;
    double gamma = 1.0;
    double delta_het = 1.0;
    double theta = 0.25;
    int n = 1000;
    int reps = 200;
    std::uint64_t seed = 0;
};

// The hyperparameter table: three overlap levels (gamma) and three
// heterogeneity levels (delta) per (p, pct_treated) cell.
struct HyperRow {
    double gamma[3];   // overlap knob: low, low-med, med
    double delta[3];   // heterogeneity: low, medium, high
};
HyperRow hyper_table(int p, double pct_treated);

// Per-scenario ground truth for one draw of the coefficient scheme (the
// scheme is deterministic in the config, so this is rep-independent).
struct TruthRecord {
    double true_ate = 0.0;
    VectorXd mu0_coef;     // length p (no intercept; mu0 intercept is 0)
    VectorXd mu1_coef;     // length p
    double mu1_intercept = 1.0;
    VectorXd ps_coef;      // length p
    double ps_intercept = 0.0;  // calibrated to pct_treated
    std::vector<int> modifier_idx;
};

// A fully specified generator: coefficients fixed by the config, intercept
// calibrated by bisection against a frozen 100k Monte Carlo panel.
class Scenario {
public:
    explicit Scenario(const ScenarioConfig& cfg);

    const TruthRecord& truth() const { return truth_; }
    const ScenarioConfig& config() const { return cfg_; }

    // (seed, rep) fully determines the dataset
    Dataset generate(int rep) const;

    // Monte Carlo estimate of the true ATE (validation of the closed form)
    double monte_carlo_ate(int draws, std::uint64_t stream = 0x41E) const;

private:
    ScenarioConfig cfg_;
    TruthRecord truth_;
};

// tau_hat - tau split into target-mismatch, sampling, and noise terms; the
// three terms sum to tau_hat - tau exactly.
struct ErrorDecomposition {
    double mismatch = 0.0;  // weighted-vs-true regression means
    double sampling = 0.0;  // sample CATE mean minus the population value
    double noise = 0.0;     // weighted residuals
    double total() const { return mismatch + sampling + noise; }
};
ErrorDecomposition decompose_error(const WeightSolution& w, const Dataset& data,
                                   const TruthRecord& truth);

// One estimator entry for run_study: returns the estimate or nullopt when the
// replicate is infeasible for that method.
struct EstimatorSpec {
    std::string name;
    std::function<std::optional<double>(const Dataset&)> fn;
};

struct StudyCell {
    std::string estimator;
    int reps = 0;
    int feasible = 0;
    double mse = 0.0;
    double abs_bias = 0.0;
    double sd = 0.0;
    std::vector<double> estimates;  // replicate-level records (NaN = failed)
};

std::vector<StudyCell> run_study(const Scenario& sc, const std::vector<EstimatorSpec>& panel,
                                 int threads = 1);

}  // namespace prtbw

#endif
