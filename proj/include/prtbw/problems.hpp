#ifndef PRTBW_PROBLEMS_HPP
#define PRTBW_PROBLEMS_HPP

#include "prtbw/model.hpp"

namespace prtbw {

// Unified constraint system covering ATE/ATT/WATE/Transport. Columns are
// standardized (mean 0, sd 1 over the target population) internally; the
// standardizer is kept so residuals and profiles can be reported on the
// original scale. Column 0 of C is the intercept.
struct ConstraintSystem {
    MatrixXd C;  // m x K, standardized, C(:,0) = 1
    MatrixXd G;  // m x L, standardized
    VectorXi z;  // treatment of analysis units
    std::vector<int> analysis_idx;
    int K = 0, L = 0, m = 0;
    int n_total = 0;  // full dataset length (w vectors are this long)
    VectorXd c_target;  // K, standardized scale (intercept component = 1)

    // affine transform record: standardized = (orig - center) / scale
    VectorXd c_center, c_scale;  // K (intercept slot: 0, 1)
    VectorXd g_center, g_scale;  // L
    std::vector<int> c_cols;     // original column per c row, -1 = intercept
    std::vector<int> g_cols;

    int rows() const { return 2 * K + L; }

    // Dense (2K+L) x m constraint matrix on the standardized scale, with the
    // 1/m row scaling built in: rows k (z=1 anchors), K+k (z=0 anchors), 2K+l
    // (between-arm g rows).
    MatrixXd constraint_matrix() const;
    VectorXd rhs() const;  // (c_target, c_target, 0)

    // residuals A w_analysis - b for a full-length weight vector
    VectorXd residuals_std(const VectorXd& w_full) const;
    VectorXd residuals_orig(const VectorXd& w_full) const;
};

ConstraintSystem build_system(const Dataset& data, const BalancePartition& part,
                              const EstimandSpec& est);

// Smooth convex dual of the balancing problem. theta layout: [alpha0; alpha1; gamma].
class DualObjective {
public:
    DualObjective(const ConstraintSystem& sys, const Dispersion& d) : sys_(sys), d_(d) {}

    int dim() const { return 2 * sys_.K + sys_.L; }

    double loss(const VectorXd& theta) const;
    VectorXd gradient(const VectorXd& theta) const;
    MatrixXd hessian(const VectorXd& theta) const;

    // per-unit weights implied by theta on analysis units
    VectorXd weights(const VectorXd& theta) const;

    const ConstraintSystem& system() const { return sys_; }
    const Dispersion& dispersion() const { return d_; }

private:
    void etas(const VectorXd& theta, VectorXd& eta1, VectorXd& eta0) const;
    const ConstraintSystem& sys_;
    Dispersion d_;
};

}  // namespace prtbw

#endif
