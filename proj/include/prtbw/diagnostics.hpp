#ifndef PRTBW_DIAGNOSTICS_HPP
#define PRTBW_DIAGNOSTICS_HPP

#include "prtbw/model.hpp"

namespace prtbw {

struct SmdRow {
    int column = -1;
    std::string name;
    double smd_tc = 0.0;        // treated vs control
    double smd_t_target = 0.0;  // treated vs target
    double smd_c_target = 0.0;  // control vs target
    bool zero_sd = false;
};

struct SmdTable {
    std::vector<SmdRow> rows;
    double avg_abs_smd_tc = 0.0;
    double avg_abs_smd_t_target = 0.0;
    double avg_abs_smd_c_target = 0.0;
};

// Three-way balance table. w absent => unweighted. The denominator is the
// unweighted pooled sd over analysis units, so values are comparable across
// weighting methods.
SmdTable smd_table(const Dataset& data, const VectorXd* w, const EstimandSpec& est);

struct TargetProfileRow {
    int column = -1;
    std::string name;
    double achieved_mean = 0.0;  // weighted common mean of the g column
    double target_mean = 0.0;    // original target-population mean
    double shift_sd = 0.0;       // (achieved - target) / target sd
};

// Modified-population exhibit: how far each retargeted column moved.
std::vector<TargetProfileRow> target_profile(const WeightSolution& w, const Dataset& data,
                                             const BalancePartition& part,
                                             const EstimandSpec& est);

struct WeightSummary {
    double min = 0.0;
    double max = 0.0;
    double cv = 0.0;  // over analysis units
    double ess_treated = 0.0;
    double ess_control = 0.0;
};

WeightSummary weight_summary(const WeightSolution& w, const Dataset& data);

}  // namespace prtbw

#endif
