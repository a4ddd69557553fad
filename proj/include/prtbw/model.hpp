#ifndef PRTBW_MODEL_HPP
#define PRTBW_MODEL_HPP

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace prtbw {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using Eigen::VectorXi;

// Unit-level sample: treatment, optional outcome, covariate basis columns,
// optional population indicator (1 = trial/analysis, 0 = target) for transport.
struct Dataset {
    VectorXi z;
    std::optional<VectorXd> y;
    MatrixXd X;
    std::optional<VectorXi> r;
    std::vector<std::string> unit_ids;         // empty when unnamed
    std::vector<std::string> covariate_names;  // empty => x1..xp

    int n() const { return static_cast<int>(z.size()); }
    int p() const { return static_cast<int>(X.cols()); }

    bool is_analysis(int i) const { return !r || (*r)(i) == 1; }

    std::string covariate_name(int j) const {
        if (j >= 0 && j < static_cast<int>(covariate_names.size())) return covariate_names[j];
        return "x" + std::to_string(j + 1);
    }

    // Throws std::invalid_argument on any invariant violation. On r=0 units
    // y and z are not required (they are ignored), everything else must be finite.
    void validate() const;
};

// Which basis columns are anchored to the target (c) vs balanced only
// between arms (g). The intercept is an implicit member of c.
struct BalancePartition {
    std::vector<int> c_idx;
    std::vector<int> g_idx;

    // checks disjointness and coverage of columns [0, p)
    void validate(int p) const;

    static BalancePartition all_in_c(int p) {
        BalancePartition part;
        for (int j = 0; j < p; ++j) part.c_idx.push_back(j);
        return part;
    }
    static BalancePartition with_g(int p, std::vector<int> g) {
        BalancePartition part;
        part.g_idx = std::move(g);
        for (int j = 0; j < p; ++j) {
            bool in_g = false;
            for (int k : part.g_idx)
                if (k == j) in_g = true;
            if (!in_g) part.c_idx.push_back(j);
        }
        return part;
    }
};

enum class DispersionKind { Entropy, Quadratic };

// Dispersion family D(w). Everything the dual needs is the induced concave
// rho and its derivatives; the primal link is w = rho'(eta).
struct Dispersion {
    DispersionKind kind = DispersionKind::Entropy;
    bool nonneg = true;  // hinge-clip rho' at 0 (quadratic only; entropy is positive anyway)

    static Dispersion entropy() { return {DispersionKind::Entropy, false}; }
    static Dispersion quadratic(bool nonneg = true) { return {DispersionKind::Quadratic, nonneg}; }
};

double rho(const Dispersion& d, double t);
double rho_prime(const Dispersion& d, double t);
double rho_second(const Dispersion& d, double t);

enum class SolveStatus { Converged, Infeasible, IterLimit };

struct DualSolution {
    VectorXd alpha0;
    VectorXd alpha1;
    VectorXd gamma;
    SolveStatus status = SolveStatus::IterLimit;
    double grad_inf_norm = std::numeric_limits<double>::infinity();
    int iterations = 0;
    double loss = std::numeric_limits<double>::quiet_NaN();
};

struct WeightSolution {
    VectorXd w;  // length n, 0 on non-analysis units
    bool feasible = false;
    std::vector<int> analysis_idx;
    int m = 0;
    VectorXd target_profile_g;          // achieved common weighted mean per g column (original scale)
    VectorXd balance_residuals;         // 2K+L, original scale
    VectorXd balance_residuals_std;     // 2K+L, standardized scale (the feasibility gate)
    double ess_treated = 0.0;
    double ess_control = 0.0;

    double max_abs_residual_std() const {
        return balance_residuals_std.size() ? balance_residuals_std.cwiseAbs().maxCoeff() : 0.0;
    }
};

enum class EstimandKind { ATE, ATT, WATE, Transport };

struct EstimandSpec {
    EstimandKind kind = EstimandKind::ATE;
    std::optional<VectorXd> h_values;  // WATE tilting values

    static EstimandSpec ate() { return {EstimandKind::ATE, std::nullopt}; }
    static EstimandSpec att() { return {EstimandKind::ATT, std::nullopt}; }
    static EstimandSpec wate(VectorXd h) { return {EstimandKind::WATE, std::move(h)}; }
    static EstimandSpec transport() { return {EstimandKind::Transport, std::nullopt}; }
};

}  // namespace prtbw

#endif
