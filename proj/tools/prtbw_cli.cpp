// prtbw: partially retargeted balancing weights toolkit (batch front end).
//
// Subcommands: weights, balance, select, estimate, transport, simulate.
// Exit codes: 0 success, 2 infeasible balance system, 3 input/config error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "prtbw/comparators.hpp"
#include "prtbw/csv.hpp"
#include "prtbw/diagnostics.hpp"
#include "prtbw/estimate.hpp"
#include "prtbw/select.hpp"
#include "prtbw/simlab.hpp"

using json = nlohmann::ordered_json;
using namespace prtbw;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInfeasible = 2;
constexpr int kExitInput = 3;

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct CommonOpts {
    std::string data_path;
    std::string treatment = "z";
    std::string outcome;
    std::string population;
    std::string id;
    std::string covariates;  // comma-separated; empty = all remaining
    std::string estimand = "ate";
    std::string h_column;  // WATE tilting column name
    std::string dispersion = "entropy";
    std::string g;  // comma-separated covariate names for the retargeted set
    bool g_given = false;
    std::string out = "prtbw_out";
    std::uint64_t seed = 0;
    int threads = 1;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool need_outcome) {
    cmd->add_option("--data", o.data_path, "input CSV")->required();
    cmd->add_option("--treatment", o.treatment, "treatment column (default z)");
    auto* out_opt = cmd->add_option("--outcome", o.outcome, "outcome column");
    if (need_outcome) out_opt->required();
    cmd->add_option("--population", o.population, "population indicator column (1=analysis)");
    cmd->add_option("--id", o.id, "unit id column");
    cmd->add_option("--covariates", o.covariates, "comma-separated covariate columns");
    cmd->add_option("--estimand", o.estimand, "ate|att|wate|transport");
    cmd->add_option("--h-column", o.h_column, "tilting column for wate");
    cmd->add_option("--dispersion", o.dispersion, "entropy|quadratic|quadratic-raw");
    cmd->add_option("--g", o.g, "retargeted covariate set (comma-separated names; '' = none)")
        ->expected(0, 1);
    cmd->add_option("--out", o.out, "output path prefix");
    cmd->add_option("--seed", o.seed, "RNG seed");
    cmd->add_option("--threads", o.threads, "worker threads");
}

std::vector<std::string> split_csv_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

Dataset load_data(const CommonOpts& o) {
    DatasetRoles roles;
    roles.treatment = o.treatment;
    roles.outcome = o.outcome;
    roles.population = o.population;
    roles.id = o.id;
    // h column must be parsed but is not a covariate
    roles.covariates = split_csv_list(o.covariates);
    return parse_dataset(o.data_path, roles);
}

Dispersion parse_dispersion(const std::string& s) {
    if (s == "entropy") return Dispersion::entropy();
    if (s == "quadratic") return Dispersion::quadratic(true);
    if (s == "quadratic-raw") return Dispersion::quadratic(false);
    throw std::runtime_error("unknown dispersion '" + s + "'");
}

EstimandSpec parse_estimand(const CommonOpts& o, const Dataset& data) {
    if (o.estimand == "ate") return EstimandSpec::ate();
    if (o.estimand == "att") return EstimandSpec::att();
    if (o.estimand == "transport") return EstimandSpec::transport();
    if (o.estimand == "wate") {
        if (o.h_column.empty()) throw std::runtime_error("wate requires --h-column");
        const CsvTable t = read_csv(o.data_path);
        const int hc = t.col(o.h_column);
        if (hc < 0) throw std::runtime_error("h column '" + o.h_column + "' not found");
        VectorXd h(data.n());
        for (int i = 0; i < data.n(); ++i) h(i) = std::stod(t.rows[i][hc]);
        return EstimandSpec::wate(std::move(h));
    }
    throw std::runtime_error("unknown estimand '" + o.estimand + "'");
}

std::vector<int> g_columns(const CommonOpts& o, const Dataset& data) {
    std::vector<int> idx;
    for (const std::string& name : split_csv_list(o.g)) {
        int found = -1;
        for (int j = 0; j < data.p(); ++j)
            if (data.covariate_name(j) == name) found = j;
        if (found < 0) throw std::runtime_error("g column '" + name + "' is not a covariate");
        idx.push_back(found);
    }
    return idx;
}

void write_json(const std::string& path, const json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << "\n";
}

void write_failure(const std::string& out_prefix, const std::string& kind,
                   const std::string& reason, const json& extra = json::object()) {
    json j;
    j["status"] = kind;
    j["reason"] = reason;
    for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
    try {
        write_json(out_prefix + ".json", j);
    } catch (const std::exception&) {
        // the reason still goes to stderr
    }
    std::cerr << kind << ": " << reason << "\n";
}

void emit_weights_csv(const std::string& path, const Dataset& data, const VectorXd& w) {
    CsvTable t;
    t.header = {"unit_id", "weight"};
    for (int i = 0; i < data.n(); ++i) {
        const std::string id =
            i < static_cast<int>(data.unit_ids.size()) ? data.unit_ids[i] : std::to_string(i + 1);
        t.rows.push_back({id, fmt17(w(i))});
    }
    write_csv(path, t);
}

void emit_balance_csv(const std::string& path, const SmdTable& table) {
    CsvTable t;
    t.header = {"covariate", "smd_tc", "smd_t_target", "smd_c_target"};
    for (const SmdRow& row : table.rows)
        t.rows.push_back({row.name, fmt17(row.smd_tc), fmt17(row.smd_t_target),
                          fmt17(row.smd_c_target)});
    write_csv(path, t);
}

json weights_report(const Dataset& data, const BalancePartition& part, const EstimandSpec& est,
                    const WeightSolution& ws, const DualSolution& dual) {
    json j;
    j["status"] = "ok";
    j["feasible"] = ws.feasible;
    j["m"] = ws.m;
    j["max_abs_residual_std"] = ws.max_abs_residual_std();
    j["ess_treated"] = ws.ess_treated;
    j["ess_control"] = ws.ess_control;
    j["iterations"] = dual.iterations;
    j["g_columns"] = json::array();
    for (int jcol : part.g_idx) j["g_columns"].push_back(data.covariate_name(jcol));
    j["target_profile_g"] = json::array();
    for (int l = 0; l < ws.target_profile_g.size(); ++l)
        j["target_profile_g"].push_back(ws.target_profile_g(l));
    j["residuals_std"] = json::array();
    for (int k = 0; k < ws.balance_residuals_std.size(); ++k)
        j["residuals_std"].push_back(ws.balance_residuals_std(k));
    (void)est;
    return j;
}

int solve_and_emit(const CommonOpts& o, const Dataset& data, const BalancePartition& part,
                   const EstimandSpec& est, const Dispersion& disp) {
    const ConstraintSystem sys = build_system(data, part, est);
    const Feasibility feas = check_feasibility(sys);
    if (feas.verdict == FeasVerdict::Infeasible) {
        json extra;
        if (feas.violated_row) extra["violated_constraint_row"] = *feas.violated_row;
        extra["lp_verdict"] = "infeasible";
        write_failure(o.out, "infeasible", "no nonnegative weights satisfy the balance system",
                      extra);
        return kExitInfeasible;
    }
    SolveResult sr = solve_weights(data, part, est, disp);
    if (sr.dual.status != SolveStatus::Converged || !sr.weights.feasible) {
        write_failure(o.out, "infeasible", "dual solve did not converge to exact balance");
        return kExitInfeasible;
    }
    emit_weights_csv(o.out + "_weights.csv", data, sr.weights.w);
    VectorXd wv = sr.weights.w;
    emit_balance_csv(o.out + "_balance.csv", smd_table(data, &wv, est));
    json rep = weights_report(data, part, est, sr.weights, sr.dual);
    const WeightSummary sum = weight_summary(sr.weights, data);
    rep["weight_min"] = sum.min;
    rep["weight_max"] = sum.max;
    rep["weight_cv"] = sum.cv;
    const auto profile = target_profile(sr.weights, data, part, est);
    rep["profile"] = json::array();
    for (const auto& row : profile)
        rep["profile"].push_back({{"covariate", row.name},
                                  {"achieved_mean", row.achieved_mean},
                                  {"target_mean", row.target_mean},
                                  {"shift_sd", row.shift_sd}});
    write_json(o.out + ".json", rep);
    std::cout << "feasible: yes\n"
              << "max |standardized residual|: " << fmt17(sr.weights.max_abs_residual_std())
              << "\n"
              << "ESS treated/control: " << fmt17(sr.weights.ess_treated) << " / "
              << fmt17(sr.weights.ess_control) << "\n";
    return kExitOk;
}

int cmd_weights(const CommonOpts& o) {
    const Dataset data = load_data(o);
    const EstimandSpec est = parse_estimand(o, data);
    const Dispersion disp = parse_dispersion(o.dispersion);
    const BalancePartition part = BalancePartition::with_g(data.p(), g_columns(o, data));
    return solve_and_emit(o, data, part, est, disp);
}

int cmd_balance(const CommonOpts& o, const std::string& weights_path) {
    const Dataset data = load_data(o);
    const EstimandSpec est = parse_estimand(o, data);
    std::optional<VectorXd> w;
    if (!weights_path.empty()) {
        const CsvTable t = read_csv(weights_path);
        const int wc = t.col("weight");
        if (wc < 0 || static_cast<int>(t.rows.size()) != data.n())
            throw std::runtime_error("weights CSV must have a 'weight' column and one row per unit");
        w = VectorXd(data.n());
        for (int i = 0; i < data.n(); ++i) (*w)(i) = std::stod(t.rows[i][wc]);
    }
    const SmdTable table = smd_table(data, w ? &*w : nullptr, est);
    emit_balance_csv(o.out + "_balance.csv", table);
    json rep;
    rep["status"] = "ok";
    rep["avg_abs_smd_tc"] = table.avg_abs_smd_tc;
    rep["avg_abs_smd_t_target"] = table.avg_abs_smd_t_target;
    rep["avg_abs_smd_c_target"] = table.avg_abs_smd_c_target;
    if (w) {
        const BalancePartition part = BalancePartition::with_g(data.p(), g_columns(o, data));
        const ConstraintSystem sys = build_system(data, part, est);
        const VectorXd resid = sys.residuals_std(*w);
        rep["residuals_std"] = json::array();
        for (int k = 0; k < resid.size(); ++k) rep["residuals_std"].push_back(resid(k));
        rep["max_abs_residual_std"] = resid.cwiseAbs().maxCoeff();
    }
    write_json(o.out + ".json", rep);
    std::cout << "avg |SMD| treated-vs-control: " << fmt17(table.avg_abs_smd_tc) << "\n";
    return kExitOk;
}

int cmd_select(const CommonOpts& o, const std::string& metric_name,
               const std::string& algorithm, double preseed_rare) {
    const Dataset data = load_data(o);
    const EstimandSpec est = parse_estimand(o, data);
    const Dispersion disp = parse_dispersion(o.dispersion);
    const MetricKind metric = metric_name == "model" ? MetricKind::Model : MetricKind::Design;
    if (metric_name != "model" && metric_name != "design")
        throw std::runtime_error("unknown metric '" + metric_name + "'");

    BalancePartition part0 = o.g_given
                                 ? BalancePartition::with_g(data.p(), g_columns(o, data))
                                 : BalancePartition::all_in_c(data.p());
    if (preseed_rare > 0 && !o.g_given) part0 = rare_binary_preseed(data, preseed_rare);

    SelectionResult sel;
    try {
        sel = algorithm == "static"
                  ? select_g_static(data, part0, est, disp, metric, {}, o.seed)
                  : select_g_adaptive(data, part0, est, disp, metric, {}, o.seed);
    } catch (const std::runtime_error& e) {
        write_failure(o.out, "infeasible", e.what());
        return kExitInfeasible;
    }

    json rep;
    rep["status"] = "ok";
    rep["steps"] = sel.steps;
    rep["g_columns"] = json::array();
    for (int j : sel.g_idx) rep["g_columns"].push_back(data.covariate_name(j));
    rep["trace"] = json::array();
    for (const MetricStep& step : sel.metric_trace) {
        json s;
        s["chosen"] = step.chosen >= 0 ? data.covariate_name(step.chosen) : "";
        s["candidates"] = json::array();
        for (size_t k = 0; k < step.candidates.size(); ++k)
            s["candidates"].push_back({{"covariate", data.covariate_name(step.candidates[k])},
                                       {"metric", step.values[k]}});
        rep["trace"].push_back(s);
    }
    rep["max_abs_residual_std"] = sel.final_weights.max_abs_residual_std();
    write_json(o.out + ".json", rep);
    emit_weights_csv(o.out + "_weights.csv", data, sel.final_weights.w);
    std::cout << "selected g:";
    for (int j : sel.g_idx) std::cout << " " << data.covariate_name(j);
    std::cout << "\nsteps: " << sel.steps << "\n";
    return kExitOk;
}

struct EstimateOpts {
    int B = 500;
    bool do_select = false;
    bool freeze_g = false;
    bool percentile = false;
    std::string metric = "design";
    std::string compare;  // comma list: ipw,ato,minimal
    double trim_lo = 0.1, trim_hi = 0.9;
};

int cmd_estimate(const CommonOpts& o, const EstimateOpts& eo, bool transport_mode) {
    CommonOpts oc = o;
    if (transport_mode) oc.estimand = "transport";
    const Dataset data = load_data(oc);
    const EstimandSpec est = parse_estimand(oc, data);
    const Dispersion disp = parse_dispersion(oc.dispersion);
    const MetricKind metric = eo.metric == "model" ? MetricKind::Model : MetricKind::Design;
    const int p = data.p();

    std::vector<int> g_fixed = g_columns(oc, data);
    bool reselect = eo.do_select && !eo.freeze_g;
    if (eo.do_select) {
        SelectionResult sel;
        try {
            sel = select_g_adaptive(data, BalancePartition::all_in_c(p), est, disp, metric, {},
                                    oc.seed);
        } catch (const std::runtime_error& e) {
            write_failure(oc.out, "infeasible", e.what());
            return kExitInfeasible;
        }
        g_fixed = sel.g_idx;
    }

    auto pipeline = [&, g_fixed](const Dataset& ds) -> std::optional<double> {
        std::vector<int> g = g_fixed;
        if (reselect) {
            try {
                SelectionResult sel = select_g_adaptive(ds, BalancePartition::all_in_c(p), est,
                                                        disp, metric, {}, oc.seed);
                g = sel.g_idx;
            } catch (const std::exception&) {
                return std::nullopt;
            }
        }
        const SolveResult sr =
            solve_weights(ds, BalancePartition::with_g(p, g), est, disp);
        if (sr.dual.status != SolveStatus::Converged || !sr.weights.feasible)
            return std::nullopt;
        return weighted_effect(sr.weights, ds);
    };

    // feasibility gate on the full data before bootstrapping
    {
        const ConstraintSystem sys =
            build_system(data, BalancePartition::with_g(p, g_fixed), est);
        if (check_feasibility(sys).verdict == FeasVerdict::Infeasible) {
            write_failure(oc.out, "infeasible",
                          "balance system infeasible on the full data with the requested g");
            return kExitInfeasible;
        }
    }

    BootstrapOptions bo;
    bo.B = eo.B;
    bo.seed = oc.seed;
    bo.threads = oc.threads;
    bo.percentile = eo.percentile;
    EstimateReport rep = bootstrap_ci(data, pipeline, bo);
    rep.estimand = est;
    rep.g_used = g_fixed;

    json j;
    j["status"] = "ok";
    j["tau_hat"] = rep.tau_hat;
    j["se_boot"] = rep.se_boot;
    j["ci_low"] = rep.ci_low;
    j["ci_high"] = rep.ci_high;
    j["boot_total"] = rep.boot_total;
    j["boot_failed"] = rep.boot_failed;
    j["ci_unreliable"] = rep.ci_unreliable;
    j["estimand"] = oc.estimand;
    j["seed"] = oc.seed;
    j["g_columns"] = json::array();
    for (int jc : rep.g_used) j["g_columns"].push_back(data.covariate_name(jc));

    for (const std::string& comp : split_csv_list(eo.compare)) {
        try {
            if (comp == "ipw") {
                const PsFit ps = fit_logistic_ps(data);
                j["ipw_ate"] = ipw_ate(data, ps.e_hat);
                j["ipw_separated"] = ps.separated;
            } else if (comp == "ato") {
                const PsFit ps = fit_logistic_ps(data);
                j["ipw_ato"] = ipw_ato(data, ps.e_hat);
            } else if (comp == "minimal") {
                // smallest solvable delta from the default grid
                for (double delta : {0.01, 0.05, 0.1}) {
                    const WeightSolution ws = minimal_weights(data, est, disp, delta);
                    if (ws.feasible) {
                        j["minimal_weights_tau"] = weighted_effect(ws, data);
                        j["minimal_weights_delta"] = delta;
                        break;
                    }
                }
            } else {
                throw std::runtime_error("unknown comparator '" + comp + "'");
            }
        } catch (const std::exception& e) {
            j["comparator_errors"].push_back(std::string(comp) + ": " + e.what());
        }
    }

    if (transport_mode) {
        // trimming comparator: drop units whose trial-membership probability
        // is outside [trim_lo, trim_hi], then fully anchored transport weights
        try {
            Dataset member = data;
            for (int i = 0; i < member.n(); ++i) member.z(i) = (*data.r)(i);
            member.r.reset();
            member.y.reset();
            const PsFit ps = fit_logistic_ps(member);
            std::vector<int> keep;
            for (int i = 0; i < data.n(); ++i)
                if (ps.e_hat(i) >= eo.trim_lo && ps.e_hat(i) <= eo.trim_hi) keep.push_back(i);
            const Dataset trimmed = subset_rows(data, keep);
            const SolveResult sr = solve_weights(trimmed, BalancePartition::all_in_c(p),
                                                 EstimandSpec::transport(), disp);
            if (sr.dual.status == SolveStatus::Converged && sr.weights.feasible) {
                j["trimming_tau"] = weighted_effect(sr.weights, trimmed);
                j["trimming_kept"] = static_cast<int>(keep.size());
            } else {
                j["trimming_tau"] = nullptr;
                j["trimming_kept"] = static_cast<int>(keep.size());
            }
        } catch (const std::exception& e) {
            j["trimming_error"] = e.what();
        }
    }

    write_json(oc.out + ".json", j);
    std::cout << "tau_hat: " << fmt17(rep.tau_hat) << "\n"
              << "95% CI: [" << fmt17(rep.ci_low) << ", " << fmt17(rep.ci_high) << "]\n"
              << "bootstrap failures: " << rep.boot_failed << "/" << rep.boot_total
              << (rep.ci_unreliable ? "  (CI unreliable)" : "") << "\n";
    return kExitOk;
}

struct SimulateOpts {
    int p = 20;
    double pct_treated = 0.20;
    std::string overlap = "med";   // low|lowmed|med -> gamma from the table
    std::string het = "high";      // low|med|high -> delta from the table
    double gamma = -1;             // explicit override
    double delta = -1;
    double theta = 0.25;
    int n = 1000;
    int reps = 200;
    std::string panel = "prtbw-true-g,ipw,ato,minimal";
};

int cmd_simulate(const CommonOpts& o, const SimulateOpts& so) {
    ScenarioConfig cfg;
    cfg.p = so.p;
    cfg.pct_treated = so.pct_treated;
    cfg.theta = so.theta;
    cfg.n = so.n;
    cfg.reps = so.reps;
    cfg.seed = o.seed;
    const HyperRow row = hyper_table(so.p, so.pct_treated);
    const int oi = so.overlap == "low" ? 0 : so.overlap == "lowmed" ? 1 : 2;
    const int hi = so.het == "low" ? 0 : so.het == "med" ? 1 : 2;
    cfg.gamma = so.gamma > 0 ? so.gamma : row.gamma[oi];
    cfg.delta_het = so.delta >= 0 ? so.delta : row.delta[hi];

    const Scenario sc(cfg);
    const Dispersion disp = parse_dispersion(o.dispersion);

    // true-g: the known non-modifier columns are kept in c, modifiers too --
    // the spirit of "true g" is retargeting exactly the non-modifiers, so g =
    // complement of the modifier set restricted to what is needed; here we
    // retarget every non-modifier column, which leaves all modifiers anchored.
    std::vector<int> true_g;
    {
        std::vector<char> is_mod(cfg.p, 0);
        for (int j : sc.truth().modifier_idx) is_mod[j] = 1;
        for (int j = 0; j < cfg.p; ++j)
            if (!is_mod[j]) true_g.push_back(j);
    }

    std::vector<EstimatorSpec> panel;
    for (const std::string& name : split_csv_list(so.panel)) {
        if (name == "prtbw-true-g") {
            panel.push_back({name, [&, true_g](const Dataset& d) -> std::optional<double> {
                                 const SolveResult sr = solve_weights(
                                     d, BalancePartition::with_g(d.p(), true_g),
                                     EstimandSpec::ate(), disp);
                                 if (sr.dual.status != SolveStatus::Converged ||
                                     !sr.weights.feasible)
                                     return std::nullopt;
                                 return weighted_effect(sr.weights, d);
                             }});
        } else if (name == "prtbw-design") {
            panel.push_back({name, [&](const Dataset& d) -> std::optional<double> {
                                 try {
                                     SelectionResult sel = select_g_adaptive(
                                         d, BalancePartition::all_in_c(d.p()),
                                         EstimandSpec::ate(), disp, MetricKind::Design, {},
                                         cfg.seed);
                                     return weighted_effect(sel.final_weights, d);
                                 } catch (const std::exception&) {
                                     return std::nullopt;
                                 }
                             }});
        } else if (name == "direct") {
            panel.push_back({name, [&](const Dataset& d) -> std::optional<double> {
                                 const SolveResult sr =
                                     solve_weights(d, BalancePartition::all_in_c(d.p()),
                                                   EstimandSpec::ate(), disp);
                                 if (sr.dual.status != SolveStatus::Converged ||
                                     !sr.weights.feasible)
                                     return std::nullopt;
                                 return weighted_effect(sr.weights, d);
                             }});
        } else if (name == "ipw") {
            panel.push_back({name, [](const Dataset& d) -> std::optional<double> {
                                 return ipw_ate(d, fit_logistic_ps(d).e_hat);
                             }});
        } else if (name == "ato") {
            panel.push_back({name, [](const Dataset& d) -> std::optional<double> {
                                 return ipw_ato(d, fit_logistic_ps(d).e_hat);
                             }});
        } else if (name == "minimal") {
            panel.push_back({name, [&](const Dataset& d) -> std::optional<double> {
                                 for (double delta : {0.01, 0.05, 0.1}) {
                                     const WeightSolution ws = minimal_weights(
                                         d, EstimandSpec::ate(), disp, delta);
                                     if (ws.feasible) return weighted_effect(ws, d);
                                 }
                                 return std::nullopt;
                             }});
        } else {
            throw std::runtime_error("unknown panel estimator '" + name + "'");
        }
    }

    const std::vector<StudyCell> cells = run_study(sc, panel, o.threads);

    CsvTable agg;
    agg.header = {"estimator", "reps", "feasible", "mse", "abs_bias", "sd"};
    CsvTable reps;
    reps.header = {"estimator", "rep", "estimate"};
    for (const StudyCell& cell : cells) {
        agg.rows.push_back({cell.estimator, std::to_string(cell.reps),
                            std::to_string(cell.feasible), fmt17(cell.mse), fmt17(cell.abs_bias),
                            fmt17(cell.sd)});
        for (size_t r = 0; r < cell.estimates.size(); ++r)
            reps.rows.push_back({cell.estimator, std::to_string(r),
                                 std::isnan(cell.estimates[r]) ? "" : fmt17(cell.estimates[r])});
    }
    write_csv(o.out + "_summary.csv", agg);
    write_csv(o.out + "_replicates.csv", reps);
    json j;
    j["status"] = "ok";
    j["true_ate"] = sc.truth().true_ate;
    j["gamma"] = cfg.gamma;
    j["delta_het"] = cfg.delta_het;
    write_json(o.out + ".json", j);
    std::cout << "true ATE: " << fmt17(sc.truth().true_ate) << "\n";
    for (const StudyCell& cell : cells)
        std::cout << cell.estimator << ": mse=" << fmt17(cell.mse)
                  << " bias=" << fmt17(cell.abs_bias) << " sd=" << fmt17(cell.sd)
                  << " feasible=" << cell.feasible << "/" << cell.reps << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"partially retargeted balancing weights toolkit"};
    app.require_subcommand(1);
    app.set_config("--config", "", "flat key=value config file (flags override)");

    CommonOpts ow, ob, os, oe, ot, osim;
    std::string balance_weights_path;
    std::string sel_metric = "design", sel_algorithm = "adaptive";
    double preseed_rare = 0.0;
    EstimateOpts eo, eot;
    SimulateOpts so;

    CLI::App* weights = app.add_subcommand("weights", "solve for balancing weights");
    add_common(weights, ow, false);

    CLI::App* balance = app.add_subcommand("balance", "balance diagnostics");
    add_common(balance, ob, false);
    balance->add_option("--weights", balance_weights_path, "weights CSV (unit_id, weight)");

    CLI::App* select = app.add_subcommand("select", "greedy retargeted-set search");
    add_common(select, os, false);
    select->add_option("--metric", sel_metric, "design|model");
    select->add_option("--algorithm", sel_algorithm, "adaptive|static");
    select->add_option("--preseed-rare", preseed_rare, "seed g with binaries rarer than this");

    CLI::App* estimate = app.add_subcommand("estimate", "point estimate + bootstrap CI");
    add_common(estimate, oe, true);
    estimate->add_option("--B", eo.B, "bootstrap replicates");
    estimate->add_flag("--select", eo.do_select, "run g-selection in the pipeline");
    estimate->add_flag("--freeze-g", eo.freeze_g, "select g once on the full data (faster, anti-conservative)");
    estimate->add_flag("--percentile", eo.percentile, "percentile CI instead of Wald");
    estimate->add_option("--metric", eo.metric, "design|model (selection metric)");
    estimate->add_option("--compare", eo.compare, "comma list: ipw,ato,minimal");

    CLI::App* transport = app.add_subcommand("transport", "transported-effect pipeline");
    add_common(transport, ot, true);
    transport->add_option("--B", eot.B, "bootstrap replicates");
    transport->add_flag("--select", eot.do_select, "run g-selection in the pipeline");
    transport->add_flag("--freeze-g", eot.freeze_g, "select g once on the full data");
    transport->add_flag("--percentile", eot.percentile, "percentile CI instead of Wald");
    transport->add_option("--metric", eot.metric, "design|model (selection metric)");
    transport->add_option("--compare", eot.compare, "comma list: ipw,ato,minimal");
    transport->add_option("--trim-low", eot.trim_lo, "trimming comparator lower bound");
    transport->add_option("--trim-high", eot.trim_hi, "trimming comparator upper bound");

    CLI::App* simulate = app.add_subcommand("simulate", "synthetic-study runner");
    simulate->add_option("--p", so.p, "covariate count (20 or 100)");
    simulate->add_option("--pct-treated", so.pct_treated, "0.20 or 0.40");
    simulate->add_option("--overlap", so.overlap, "low|lowmed|med");
    simulate->add_option("--het", so.het, "low|med|high");
    simulate->add_option("--gamma", so.gamma, "explicit overlap knob (overrides --overlap)");
    simulate->add_option("--delta", so.delta, "explicit heterogeneity knob (overrides --het)");
    simulate->add_option("--theta", so.theta, "fraction of effect modifiers");
    simulate->add_option("--n", so.n, "sample size per replicate");
    simulate->add_option("--reps", so.reps, "replicates");
    simulate->add_option("--panel", so.panel, "comma list of estimators");
    simulate->add_option("--dispersion", osim.dispersion, "entropy|quadratic|quadratic-raw");
    simulate->add_option("--out", osim.out, "output path prefix");
    simulate->add_option("--seed", osim.seed, "RNG seed");
    simulate->add_option("--threads", osim.threads, "worker threads");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitInput;
    }

    try {
        if (weights->parsed()) {
            ow.g_given = weights->count("--g") > 0;
            return cmd_weights(ow);
        }
        if (balance->parsed()) return cmd_balance(ob, balance_weights_path);
        if (select->parsed()) {
            os.g_given = select->count("--g") > 0;
            return cmd_select(os, sel_metric, sel_algorithm, preseed_rare);
        }
        if (estimate->parsed()) return cmd_estimate(oe, eo, false);
        if (transport->parsed()) return cmd_estimate(ot, eot, true);
        if (simulate->parsed()) return cmd_simulate(osim, so);
    } catch (const std::exception& e) {
        const CommonOpts& o = weights->parsed()   ? ow
                              : balance->parsed() ? ob
                              : select->parsed()  ? os
                              : estimate->parsed() ? oe
                              : transport->parsed() ? ot
                                                    : osim;
        write_failure(o.out, "input_error", e.what());
        return kExitInput;
    }
    return kExitInput;
}
