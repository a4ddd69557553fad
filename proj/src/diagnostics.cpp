#include "prtbw/diagnostics.hpp"

#include <cmath>

namespace prtbw {

namespace {

struct ArmStats {
    double mean1 = 0.0, mean0 = 0.0;  // weighted arm means
    double sd1 = 0.0, sd0 = 0.0;      // unweighted arm sds
};

ArmStats arm_stats(const Dataset& data, int col, const VectorXd* w) {
    double s1 = 0, s0 = 0, m1 = 0, m0 = 0;
    double u1 = 0, u0 = 0, q1 = 0, q0 = 0;
    int n1 = 0, n0 = 0;
    for (int i = 0; i < data.n(); ++i) {
        if (!data.is_analysis(i)) continue;
        const double x = data.X(i, col);
        const double wi = w ? (*w)(i) : 1.0;
        if (data.z(i) == 1) {
            s1 += wi;
            m1 += wi * x;
            u1 += x;
            q1 += x * x;
            ++n1;
        } else {
            s0 += wi;
            m0 += wi * x;
            u0 += x;
            q0 += x * x;
            ++n0;
        }
    }
    ArmStats st;
    st.mean1 = s1 > 0 ? m1 / s1 : 0.0;
    st.mean0 = s0 > 0 ? m0 / s0 : 0.0;
    const double v1 = n1 > 1 ? (q1 - u1 * u1 / n1) / (n1 - 1) : 0.0;
    const double v0 = n0 > 1 ? (q0 - u0 * u0 / n0) / (n0 - 1) : 0.0;
    st.sd1 = v1 > 0 ? std::sqrt(v1) : 0.0;
    st.sd0 = v0 > 0 ? std::sqrt(v0) : 0.0;
    return st;
}

double target_mean_of(const Dataset& data, int col, const EstimandSpec& est) {
    double num = 0, den = 0;
    for (int i = 0; i < data.n(); ++i) {
        double t = 0;
        switch (est.kind) {
            case EstimandKind::ATE:
                t = 1.0;
                break;
            case EstimandKind::ATT:
                t = data.z(i) == 1 ? 1.0 : 0.0;
                break;
            case EstimandKind::WATE:
                t = (*est.h_values)(i);
                break;
            case EstimandKind::Transport:
                t = (*data.r)(i) == 0 ? 1.0 : 0.0;
                break;
        }
        num += t * data.X(i, col);
        den += t;
    }
    return num / den;
}

double target_sd_of(const Dataset& data, int col, const EstimandSpec& est) {
    double num = 0, den = 0;
    const double mean = target_mean_of(data, col, est);
    for (int i = 0; i < data.n(); ++i) {
        double t = 0;
        switch (est.kind) {
            case EstimandKind::ATE:
                t = 1.0;
                break;
            case EstimandKind::ATT:
                t = data.z(i) == 1 ? 1.0 : 0.0;
                break;
            case EstimandKind::WATE:
                t = (*est.h_values)(i);
                break;
            case EstimandKind::Transport:
                t = (*data.r)(i) == 0 ? 1.0 : 0.0;
                break;
        }
        num += t * (data.X(i, col) - mean) * (data.X(i, col) - mean);
        den += t;
    }
    const double var = den > 0 ? num / den : 0.0;
    return var > 0 ? std::sqrt(var) : 1.0;
}

}  // namespace

SmdTable smd_table(const Dataset& data, const VectorXd* w, const EstimandSpec& est) {
    SmdTable table;
    for (int j = 0; j < data.p(); ++j) {
        ArmStats st = arm_stats(data, j, w);
        const double pooled = std::sqrt((st.sd1 * st.sd1 + st.sd0 * st.sd0) / 2.0);
        SmdRow row;
        row.column = j;
        row.name = data.covariate_name(j);
        if (pooled <= 0.0) {
            row.zero_sd = true;  // SMD reported as 0 with flag
        } else {
            const double tgt = target_mean_of(data, j, est);
            row.smd_tc = (st.mean1 - st.mean0) / pooled;
            row.smd_t_target = (st.mean1 - tgt) / pooled;
            row.smd_c_target = (st.mean0 - tgt) / pooled;
        }
        table.avg_abs_smd_tc += std::abs(row.smd_tc);
        table.avg_abs_smd_t_target += std::abs(row.smd_t_target);
        table.avg_abs_smd_c_target += std::abs(row.smd_c_target);
        table.rows.push_back(row);
    }
    if (!table.rows.empty()) {
        table.avg_abs_smd_tc /= table.rows.size();
        table.avg_abs_smd_t_target /= table.rows.size();
        table.avg_abs_smd_c_target /= table.rows.size();
    }
    return table;
}

std::vector<TargetProfileRow> target_profile(const WeightSolution& w, const Dataset& data,
                                             const BalancePartition& part,
                                             const EstimandSpec& est) {
    std::vector<TargetProfileRow> rows;
    for (size_t l = 0; l < part.g_idx.size(); ++l) {
        const int col = part.g_idx[l];
        TargetProfileRow row;
        row.column = col;
        row.name = data.covariate_name(col);
        row.achieved_mean = w.target_profile_g(static_cast<int>(l));
        row.target_mean = target_mean_of(data, col, est);
        row.shift_sd = (row.achieved_mean - row.target_mean) / target_sd_of(data, col, est);
        rows.push_back(row);
    }
    return rows;
}

WeightSummary weight_summary(const WeightSolution& w, const Dataset& data) {
    WeightSummary s;
    s.ess_treated = w.ess_treated;
    s.ess_control = w.ess_control;
    double sum = 0, sq = 0;
    int m = 0;
    bool first = true;
    for (int i : w.analysis_idx) {
        const double wi = w.w(i);
        if (first) {
            s.min = s.max = wi;
            first = false;
        }
        s.min = std::min(s.min, wi);
        s.max = std::max(s.max, wi);
        sum += wi;
        sq += wi * wi;
        ++m;
    }
    if (m > 0) {
        const double mean = sum / m;
        const double var = sq / m - mean * mean;
        s.cv = mean != 0.0 && var > 0 ? std::sqrt(var) / mean : 0.0;
    }
    (void)data;
    return s;
}

}  // namespace prtbw
