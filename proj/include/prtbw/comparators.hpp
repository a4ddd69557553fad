#ifndef PRTBW_COMPARATORS_HPP
#define PRTBW_COMPARATORS_HPP

#include "prtbw/solver.hpp"

namespace prtbw {

struct PsFit {
    VectorXd e_hat;  // clipped to [0.001, 0.999] only to avoid division blowup
    VectorXd coef;   // intercept first
    bool separated = false;
    int iterations = 0;
};

// Unpenalized maximum-likelihood logistic regression by IRLS on the analysis
// units. Divergence (coefficient norm > 1e4) flags separation.
PsFit fit_logistic_ps(const Dataset& data);

// Hajek (self-normalizing) weighted differences in means.
double ipw_ate(const Dataset& data, const VectorXd& e_hat);
double ipw_ato(const Dataset& data, const VectorXd& e_hat);

// Approximate-balance weights: per arm, the dual loss of the fully anchored
// problem plus delta * l1 on the non-intercept dual coefficients, minimized by
// proximal gradient. Always solvable; standardized residuals obey |r| <= delta.
WeightSolution minimal_weights(const Dataset& data, const EstimandSpec& est, const Dispersion& d,
                               double delta);

}  // namespace prtbw

#endif
