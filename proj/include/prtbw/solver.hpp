#ifndef PRTBW_SOLVER_HPP
#define PRTBW_SOLVER_HPP

#include "prtbw/problems.hpp"

namespace prtbw {

struct SolverConfig {
    double tol_balance = 1e-8;  // gradient sup-norm on the standardized scale
    int max_iter = 500;
    double theta_max = 1e6;  // dual divergence bound
    double ridge = 1e-10;    // Hessian jitter
};

enum class FeasVerdict { Feasible, Infeasible, Unknown };

struct Feasibility {
    FeasVerdict verdict = FeasVerdict::Unknown;
    std::optional<VectorXd> witness;  // length m, satisfies A w = b, w >= 0
    std::optional<int> violated_row;
    int dropped_rows = 0;  // redundant rows removed before phase 1
};

// Damped Newton with Armijo backtracking on the smooth dual. theta = 0 start
// (uniform-weight link value). A runaway iterate signals primal infeasibility.
DualSolution solve_dual(const DualObjective& obj, const SolverConfig& cfg = {},
                        const std::optional<VectorXd>& init = std::nullopt);

// Primal recovery w_i = rho'(eta_i) plus from-scratch balance certificate.
WeightSolution recover_weights(const DualSolution& sol, const ConstraintSystem& sys,
                               const Dispersion& d, double tol_balance = 1e-6);

// Exact LP oracle: phase-1 simplex (Bland's rule) on {A w = b, w >= 0}.
Feasibility check_feasibility(const ConstraintSystem& sys);

// convenience: build + solve + recover in one call
struct SolveResult {
    DualSolution dual;
    WeightSolution weights;  // valid only when dual.status == Converged
};
SolveResult solve_weights(const Dataset& data, const BalancePartition& part,
                          const EstimandSpec& est, const Dispersion& d,
                          const SolverConfig& cfg = {});

}  // namespace prtbw

#endif
