// End-to-end acceptance suite: one PASS/FAIL line per criterion, nonzero exit
// if any fail. Tolerances are pinned here, next to the check they gate.
// argv[1] is the command-line binary, used by the determinism criterion.
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "prtbw/comparators.hpp"
#include "prtbw/estimate.hpp"
#include "prtbw/rng.hpp"
#include "prtbw/select.hpp"
#include "prtbw/simlab.hpp"
#include "prtbw/solver.hpp"

using namespace prtbw;
namespace fs = std::filesystem;

namespace {

int g_failed = 0;

void report(int num, const std::string& what, bool pass, const std::string& detail = "") {
    std::cout << (pass ? "PASS" : "FAIL") << " criterion " << num << ": " << what;
    if (!detail.empty()) std::cout << " [" << detail << "]";
    std::cout << std::endl;
    if (!pass) ++g_failed;
}

std::string fmt(double v) {
    std::ostringstream ss;
    ss.precision(6);
    ss << v;
    return ss.str();
}

// random well-overlapped dataset; g_frac of covariates go to the retargeted set
Dataset random_instance(RngStream& rng, int n, int p) {
    Dataset d;
    d.z = VectorXi(n);
    d.X = MatrixXd(n, p);
    d.y = VectorXd(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < p; ++j)
            d.X(i, j) = (j % 3 == 2) ? double(rng.bernoulli(0.4)) : rng.normal();
        const double eta = 0.6 * d.X(i, 0) - 0.4 * d.X(i, 1 % p);
        d.z(i) = rng.bernoulli(1.0 / (1.0 + std::exp(-eta))) ? 1 : 0;
        (*d.y)(i) = d.X.row(i).sum() + d.z(i) + rng.normal();
    }
    return d;
}

// ---------------------------------------------------------------------------

void criterion1() {
    // exact balance on random feasible instances, original and standardized
    constexpr double kTol = 1e-6;
    RngStream rng(101, 0);
    int tried = 0, solved = 0;
    double worst = 0.0;
    while (solved < 50 && tried < 120) {
        ++tried;
        const int n = 100 + int(rng.below(1901));  // <= 2000
        const int p = 2 + int(rng.below(99));      // <= 100
        Dataset d = random_instance(rng, n, p);
        std::vector<int> g_idx;
        for (int j = 0; j < p; ++j)
            if (rng.bernoulli(0.3)) g_idx.push_back(j);
        const BalancePartition part = BalancePartition::with_g(p, g_idx);
        SolveResult sr = solve_weights(d, part, EstimandSpec::ate(), Dispersion::entropy());
        if (sr.dual.status != SolveStatus::Converged) continue;  // rare at this overlap
        ++solved;
        ConstraintSystem sys = build_system(d, part, EstimandSpec::ate());
        worst = std::max(worst, sr.weights.balance_residuals_std.cwiseAbs().maxCoeff());
        worst = std::max(worst, sys.residuals_std(sr.weights.w).cwiseAbs().maxCoeff());
    }
    report(1, "exact balance <= 1e-6 on 50 random feasible instances",
           solved >= 50 && worst <= kTol,
           "solved=" + std::to_string(solved) + " worst=" + fmt(worst));
}

void criterion2() {
    // quadratic dispersion without the hinge solves the minimum-norm QP; the
    // oracle is the KKT linear system of min w'w s.t. A w = b, solved with a
    // rank-revealing factorization independent of the Newton path
    constexpr double kTol = 1e-5;
    RngStream rng(102, 0);
    double worst = 0.0;
    int done = 0;
    for (int t = 0; t < 25 && done < 20; ++t) {
        const int n = 10 + int(rng.below(41));  // <= 50
        const int p = 1 + int(rng.below(4));
        Dataset d = random_instance(rng, n, p);
        std::vector<int> g_idx;
        if (p > 1 && rng.bernoulli(0.5)) g_idx.push_back(p - 1);
        const BalancePartition part = BalancePartition::with_g(p, g_idx);
        ConstraintSystem sys = build_system(d, part, EstimandSpec::ate());
        SolveResult sr = solve_weights(d, part, EstimandSpec::ate(), Dispersion::quadratic(false));
        if (sr.dual.status != SolveStatus::Converged) continue;
        ++done;

        const MatrixXd A = sys.constraint_matrix();
        const VectorXd b = sys.rhs();
        const int m = sys.m, r = int(A.rows());
        MatrixXd kkt = MatrixXd::Zero(m + r, m + r);
        kkt.topLeftCorner(m, m) = 2.0 * MatrixXd::Identity(m, m);
        kkt.topRightCorner(m, r) = A.transpose();
        kkt.bottomLeftCorner(r, m) = A;
        VectorXd rhs = VectorXd::Zero(m + r);
        rhs.tail(r) = b;
        const VectorXd sol = kkt.completeOrthogonalDecomposition().solve(rhs);
        for (int a = 0; a < m; ++a)
            worst = std::max(worst,
                             std::abs(sol(a) - sr.weights.w(sys.analysis_idx[a])));
    }
    report(2, "quadratic solution matches the QP oracle to 1e-5",
           done >= 20 && worst <= kTol, "instances=" + std::to_string(done) + " worst=" + fmt(worst));
}

void criterion3() {
    // analytic dual gradient vs central finite differences
    constexpr double kTol = 1e-5;
    RngStream rng(103, 0);
    Dataset d = random_instance(rng, 80, 3);
    const BalancePartition part = BalancePartition::with_g(3, {2});
    ConstraintSystem sys = build_system(d, part, EstimandSpec::ate());
    double worst = 0.0;
    for (const Dispersion& disp :
         {Dispersion::entropy(), Dispersion::quadratic(false), Dispersion::quadratic(true)}) {
        DualObjective obj(sys, disp);
        for (int t = 0; t < 20; ++t) {
            VectorXd theta(obj.dim());
            for (int k = 0; k < theta.size(); ++k) theta(k) = 0.3 * rng.normal();
            VectorXd g = obj.gradient(theta);
            VectorXd g_fd(theta.size());
            for (int k = 0; k < theta.size(); ++k) {
                const double h = 1e-6 * std::max(1.0, std::abs(theta(k)));
                VectorXd tp = theta, tm = theta;
                tp(k) += h;
                tm(k) -= h;
                g_fd(k) = (obj.loss(tp) - obj.loss(tm)) / (2.0 * h);
            }
            const double rel = (g_fd - g).norm() / std::max(1.0, g.norm());
            worst = std::max(worst, rel);
        }
    }
    report(3, "dual gradient matches central differences to 1e-5", worst <= kTol,
           "worst=" + fmt(worst));
}

void criterion4() {
    // (a) hull fixture: fully anchored infeasible, retargeted feasible;
    // (b) structural positivity violation: retargeted feasibility rate is
    //     nondecreasing in n and >= 0.99 at n = 1600 over 200 replicates
    Dataset hull;
    hull.z = VectorXi(4);
    hull.z << 1, 1, 0, 0;
    hull.X = MatrixXd(4, 1);
    hull.X << 2.0, 2.5, -4.0, 2.4;
    ConstraintSystem anchored = build_system(hull, BalancePartition::all_in_c(1), EstimandSpec::ate());
    ConstraintSystem retarg = build_system(hull, BalancePartition::with_g(1, {0}), EstimandSpec::ate());
    const bool fixture_ok = check_feasibility(anchored).verdict == FeasVerdict::Infeasible &&
                            check_feasibility(retarg).verdict == FeasVerdict::Feasible;

    const int ns[3] = {100, 400, 1600};
    double rate[3];
    for (int k = 0; k < 3; ++k) {
        int feas = 0;
        for (int rep = 0; rep < 200; ++rep) {
            RngStream rng(104, std::uint64_t(k) * 1000 + rep);
            Dataset d;
            const int n = ns[k];
            d.z = VectorXi(n);
            d.X = MatrixXd(n, 2);
            for (int i = 0; i < n; ++i) {
                d.X(i, 0) = rng.normal();
                d.X(i, 1) = rng.bernoulli(0.3) ? 1.0 : 0.0;
                // nobody with x2 = 1 can be treated: structural violation
                const double e =
                    d.X(i, 1) == 1.0 ? 0.0 : 1.0 / (1.0 + std::exp(-(3.0 * d.X(i, 0) - 2.0)));
                d.z(i) = rng.bernoulli(e) ? 1 : 0;
            }
            int n1 = 0;
            for (int i = 0; i < n; ++i) n1 += d.z(i);
            if (n1 == 0 || n1 == n) continue;
            ConstraintSystem sys =
                build_system(d, BalancePartition::with_g(2, {1}), EstimandSpec::ate());
            if (check_feasibility(sys).verdict == FeasVerdict::Feasible) ++feas;
        }
        rate[k] = feas / 200.0;
    }
    const bool rates_ok = rate[0] <= rate[1] && rate[1] <= rate[2] && rate[2] >= 0.99;
    report(4, "retargeting restores feasibility under positivity violations",
           fixture_ok && rates_ok,
           "fixture=" + std::string(fixture_ok ? "ok" : "bad") + " rates=" + fmt(rate[0]) + "/" +
               fmt(rate[1]) + "/" + fmt(rate[2]));
}

void criterion5() {
    // with no retargeted set the arms decouple: the joint solve equals two
    // independent single-arm solves
    constexpr double kTol = 1e-6;
    RngStream rng(105, 0);
    Dataset d = random_instance(rng, 400, 4);
    SolveResult joint =
        solve_weights(d, BalancePartition::all_in_c(4), EstimandSpec::ate(), Dispersion::entropy());
    bool ok = joint.dual.status == SolveStatus::Converged;
    double worst = 0.0;
    if (ok) {
        for (int arm = 0; arm <= 1; ++arm) {
            // single-arm problem: flip the other arm out by keeping only the
            // arm's anchor rows; realized by solving on a copy where the
            // other arm's units are present but the solution must coincide
            // on this arm because the dual blocks share no variables
            ConstraintSystem sys = build_system(d, BalancePartition::all_in_c(4), EstimandSpec::ate());
            DualObjective obj(sys, Dispersion::entropy());
            // decoupling check via the dual: perturb the other arm's block
            // and confirm this arm's gradient block is unchanged
            VectorXd theta = VectorXd::Zero(obj.dim());
            VectorXd g0 = obj.gradient(theta);
            VectorXd theta2 = theta;
            for (int k = 0; k < sys.K; ++k) theta2(arm == 0 ? sys.K + k : k) += 0.7;
            VectorXd g1 = obj.gradient(theta2);
            for (int k = 0; k < sys.K; ++k) {
                const int own = arm == 0 ? k : sys.K + k;
                worst = std::max(worst, std::abs(g1(own) - g0(own)));
            }
        }
        // and the weights from per-arm datasets agree with the joint solve
        for (int arm = 0; arm <= 1; ++arm) {
            std::vector<int> keep;
            for (int i = 0; i < d.n(); ++i)
                if (d.z(i) == arm) keep.push_back(i);
            Dataset da = subset_rows(d, keep);
            // anchor to the *full-sample* covariate means via a wate-style
            // trick is unnecessary: compare achieved weighted means instead
            ConstraintSystem sys = build_system(d, BalancePartition::all_in_c(4), EstimandSpec::ate());
            VectorXd mean_w = VectorXd::Zero(4);
            double sw = 0;
            for (int i = 0; i < d.n(); ++i)
                if (d.z(i) == arm) {
                    mean_w += joint.weights.w(i) * d.X.row(i).transpose();
                    sw += joint.weights.w(i);
                }
            const VectorXd target = d.X.colwise().mean();
            worst = std::max(worst, (mean_w / sw - target).cwiseAbs().maxCoeff());
        }
    }
    report(5, "empty retargeted set separates the two arm problems", ok && worst <= kTol,
           "worst=" + fmt(worst));
}

void criterion6() {
    // equal outcome slopes: the estimator mean matches the closed-form effect
    ScenarioConfig cfg;
    cfg.p = 20;
    cfg.pct_treated = 0.2;
    cfg.gamma = 2.0;
    cfg.delta_het = 0.0;
    cfg.n = 4000;
    cfg.seed = 106;
    Scenario sc(cfg);
    std::vector<int> g_idx;
    for (int j = cfg.p / 2; j < cfg.p; ++j) g_idx.push_back(j);  // binary block
    const BalancePartition part = BalancePartition::with_g(cfg.p, g_idx);
    std::vector<double> est;
    for (int rep = 0; rep < 200; ++rep) {
        Dataset d = sc.generate(rep);
        SolveResult sr = solve_weights(d, part, EstimandSpec::ate(), Dispersion::entropy());
        if (sr.dual.status != SolveStatus::Converged) continue;
        est.push_back(weighted_effect(sr.weights, d));
    }
    double mean = 0, var = 0;
    for (double e : est) mean += e;
    mean /= est.size();
    for (double e : est) var += (e - mean) * (e - mean);
    var /= (est.size() - 1);
    const double mc_se = std::sqrt(var / est.size());
    const double gap = std::abs(mean - sc.truth().true_ate);
    report(6, "estimator mean matches the closed-form effect (no heterogeneity)",
           est.size() >= 190 && gap <= 2.0 * mc_se,
           "reps=" + std::to_string(est.size()) + " gap=" + fmt(gap) + " 2se=" + fmt(2 * mc_se));
}

void criterion7() {
    // unequal slopes: the estimate tracks the plug-in value implied by the
    // achieved retargeted profile and the true coefficients, at a 1/sqrt(n)
    // rate (error should roughly halve from n = 2000 to n = 8000)
    ScenarioConfig base;
    base.p = 20;
    base.pct_treated = 0.2;
    base.gamma = 2.0;
    base.delta_het = 1.0;
    base.seed = 107;
    double mad[2] = {0, 0};
    int cnt[2] = {0, 0};
    const int nlist[2] = {2000, 8000};
    for (int k = 0; k < 2; ++k) {
        ScenarioConfig cfg = base;
        cfg.n = nlist[k];
        Scenario sc(cfg);
        const TruthRecord& tr = sc.truth();
        const BalancePartition part = BalancePartition::with_g(cfg.p, tr.modifier_idx);
        for (int rep = 0; rep < 80; ++rep) {
            Dataset d = sc.generate(rep);
            SolveResult sr = solve_weights(d, part, EstimandSpec::ate(), Dispersion::entropy());
            if (sr.dual.status != SolveStatus::Converged) continue;
            double plug = tr.mu1_intercept;
            for (size_t q = 0; q < tr.modifier_idx.size(); ++q) {
                const int j = tr.modifier_idx[q];
                plug += (tr.mu1_coef(j) - tr.mu0_coef(j)) * sr.weights.target_profile_g(q);
            }
            mad[k] += std::abs(weighted_effect(sr.weights, d) - plug);
            ++cnt[k];
        }
        mad[k] /= std::max(cnt[k], 1);
    }
    const double ratio = mad[1] / mad[0];
    report(7, "estimate converges to the profile plug-in value at root-n",
           cnt[0] >= 50 && cnt[1] >= 50 && ratio <= 0.65,
           "reps=" + std::to_string(cnt[0]) + "/" + std::to_string(cnt[1]) +
               " mad2000=" + fmt(mad[0]) + " mad8000=" + fmt(mad[1]) + " ratio=" + fmt(ratio));
}

struct PanelStats {
    double mse = 0, sd = 0, bias = 0;
    int feas = 0;
    void finalize(double truth, const std::vector<double>& est) {
        feas = int(est.size());
        if (est.empty()) return;
        double mean = 0;
        for (double e : est) mean += e;
        mean /= feas;
        for (double e : est) {
            mse += (e - truth) * (e - truth);
            sd += (e - mean) * (e - mean);
        }
        mse /= feas;
        sd = std::sqrt(sd / std::max(feas - 1, 1));
        bias = std::abs(mean - truth);
    }
};

void criterion8() {
    // moderate overlap: the design-selected estimator is no more variable
    // than inverse-propensity weighting
    ScenarioConfig cfg;
    cfg.p = 20;
    cfg.pct_treated = 0.2;
    cfg.gamma = 2.0;
    cfg.delta_het = 1.0;
    cfg.n = 1000;
    cfg.seed = 108;
    Scenario sc(cfg);
    std::vector<double> design, ipw;
    for (int rep = 0; rep < 200; ++rep) {
        Dataset d = sc.generate(rep);
        try {
            SelectionResult sel =
                select_g_adaptive(d, BalancePartition::all_in_c(cfg.p), EstimandSpec::ate(),
                                  Dispersion::entropy(), MetricKind::Design, {}, rep);
            design.push_back(weighted_effect(sel.final_weights, d));
        } catch (const std::exception&) {
        }
        PsFit fit = fit_logistic_ps(d);
        if (!fit.separated) ipw.push_back(ipw_ate(d, fit.e_hat));
    }
    PanelStats sd_d, sd_i;
    sd_d.finalize(sc.truth().true_ate, design);
    sd_i.finalize(sc.truth().true_ate, ipw);
    report(8, "design-selected weights are no more variable than IPW",
           sd_d.feas >= 180 && sd_i.feas >= 180 && sd_d.sd <= sd_i.sd,
           "sd_design=" + fmt(sd_d.sd) + " sd_ipw=" + fmt(sd_i.sd));
}

void criterion9() {
    // low overlap with strong heterogeneity: retargeted weighting beats the
    // comparator panel on mean squared error
    const HyperRow hr = hyper_table(20, 0.2);
    ScenarioConfig cfg;
    cfg.p = 20;
    cfg.pct_treated = 0.2;
    cfg.gamma = hr.gamma[0];   // 0.75: least overlap in the table
    cfg.delta_het = hr.delta[2];  // 2.0: most heterogeneity
    cfg.n = 1000;
    cfg.seed = 109;
    Scenario sc(cfg);
    const TruthRecord& tr = sc.truth();
    // oracle retargeting: anchor the effect modifiers (their slope gap is the
    // only bias channel) and retarget everything else to restore feasibility
    std::vector<int> non_mod;
    for (int j = 0; j < cfg.p; ++j)
        if (std::find(tr.modifier_idx.begin(), tr.modifier_idx.end(), j) ==
            tr.modifier_idx.end())
            non_mod.push_back(j);
    const BalancePartition true_g = BalancePartition::with_g(cfg.p, non_mod);

    std::vector<double> e_true, e_design, e_ipw, e_ato, e_min;
    for (int rep = 0; rep < 200; ++rep) {
        Dataset d = sc.generate(rep);
        SolveResult sr = solve_weights(d, true_g, EstimandSpec::ate(), Dispersion::entropy());
        if (sr.dual.status == SolveStatus::Converged)
            e_true.push_back(weighted_effect(sr.weights, d));
        try {
            SelectionResult sel =
                select_g_adaptive(d, BalancePartition::all_in_c(cfg.p), EstimandSpec::ate(),
                                  Dispersion::entropy(), MetricKind::Design, {}, rep);
            e_design.push_back(weighted_effect(sel.final_weights, d));
        } catch (const std::exception&) {
        }
        PsFit fit = fit_logistic_ps(d);
        if (!fit.separated) {
            e_ipw.push_back(ipw_ate(d, fit.e_hat));
            e_ato.push_back(ipw_ato(d, fit.e_hat));
        }
        // smallest solvable slack from the grid; when none is attainable use
        // the best-effort weights at the loosest level (the comparator still
        // reports an estimate, it is just further from balance)
        bool min_done = false;
        WeightSolution loosest;
        for (double delta : {0.01, 0.05, 0.1}) {
            loosest = minimal_weights(d, EstimandSpec::ate(), Dispersion::entropy(), delta);
            if (loosest.feasible) {
                e_min.push_back(weighted_effect(loosest, d));
                min_done = true;
                break;
            }
        }
        if (!min_done) e_min.push_back(weighted_effect(loosest, d));
    }
    PanelStats s_true, s_design, s_ipw, s_ato, s_min;
    s_true.finalize(tr.true_ate, e_true);
    s_design.finalize(tr.true_ate, e_design);
    s_ipw.finalize(tr.true_ate, e_ipw);
    s_ato.finalize(tr.true_ate, e_ato);
    s_min.finalize(tr.true_ate, e_min);
    const bool ok = s_true.feas >= 150 && s_ato.feas >= 150 && s_min.feas >= 150 &&
                    s_true.mse < s_ato.mse && s_true.mse < s_min.mse &&
                    s_design.mse < s_ipw.mse;
    report(9, "retargeted weighting beats the comparator panel on MSE", ok,
           "feas=" + std::to_string(s_true.feas) + "/" + std::to_string(s_ato.feas) + "/" +
               std::to_string(s_min.feas) + " mse true-g/ato/minimal=" + fmt(s_true.mse) + "/" +
               fmt(s_ato.mse) + "/" + fmt(s_min.mse) + " design/ipw=" + fmt(s_design.mse) + "/" +
               fmt(s_ipw.mse));
}

void criterion10() {
    // overlap weights balance covariate means exactly at the logistic MLE
    constexpr double kTol = 1e-6;
    RngStream rng(110, 0);
    double worst = 0.0;
    int done = 0;
    for (int t = 0; t < 10; ++t) {
        Dataset d = random_instance(rng, 600, 3);
        PsFit fit = fit_logistic_ps(d);
        if (fit.separated) continue;
        ++done;
        VectorXd m1 = VectorXd::Zero(3), m0 = VectorXd::Zero(3);
        double w1 = 0, w0 = 0;
        for (int i = 0; i < d.n(); ++i) {
            const double e = fit.e_hat(i);
            if (d.z(i) == 1) {
                m1 += (1.0 - e) * d.X.row(i).transpose();
                w1 += 1.0 - e;
            } else {
                m0 += e * d.X.row(i).transpose();
                w0 += e;
            }
        }
        worst = std::max(worst, (m1 / w1 - m0 / w0).cwiseAbs().maxCoeff());
    }
    report(10, "overlap weights balance means exactly at the logistic MLE",
           done >= 8 && worst <= kTol, "worst=" + fmt(worst));
}

void criterion11() {
    // entropy weights are strictly positive and each arm's weights sum to the
    // intercept anchor (the analysis sample size)
    constexpr double kTol = 1e-6;
    RngStream rng(111, 0);
    bool ok = true;
    double worst = 0.0, wmin = 1e300;
    for (int t = 0; t < 10; ++t) {
        Dataset d = random_instance(rng, 500, 4);
        SolveResult sr = solve_weights(d, BalancePartition::with_g(4, {3}), EstimandSpec::ate(),
                                       Dispersion::entropy());
        if (sr.dual.status != SolveStatus::Converged) {
            ok = false;
            continue;
        }
        double s1 = 0, s0 = 0;
        for (int i = 0; i < d.n(); ++i) {
            (d.z(i) == 1 ? s1 : s0) += sr.weights.w(i);
            if (sr.weights.w(i) != 0.0) wmin = std::min(wmin, sr.weights.w(i));
        }
        worst = std::max({worst, std::abs(s1 - sr.weights.m) / sr.weights.m,
                          std::abs(s0 - sr.weights.m) / sr.weights.m});
    }
    report(11, "entropy weights are positive with anchored arm totals",
           ok && wmin > 0.0 && worst <= kTol, "min_w=" + fmt(wmin) + " worst_sum_err=" + fmt(worst));
}

void criterion12(const std::string& cli) {
    // same binary, same seed, same flags: byte-identical artifacts
    const fs::path dir = fs::temp_directory_path() / "prtbw_acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const fs::path csv = dir / "d.csv";
    {
        std::ofstream out(csv);
        out << "z,y,x1,x2\n";
        RngStream rng(112, 0);
        for (int i = 0; i < 200; ++i) {
            const double x1 = rng.normal(), x2 = rng.bernoulli(0.5) ? 1 : 0;
            const int z = rng.bernoulli(1.0 / (1.0 + std::exp(-0.5 * x1))) ? 1 : 0;
            out << z << "," << (x1 + z + 0.2 * x2) << "," << x1 << "," << x2 << "\n";
        }
    }
    auto run = [&](const std::string& args) {
        const std::string cmd = cli + " " + args + " >/dev/null 2>&1";
        const int rc = std::system(cmd.c_str());
        return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    };
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    const std::string base = "estimate --data " + csv.string() +
                             " --outcome y --g x2 --B 80 --seed 19 --compare ipw,ato --out ";
    bool ok = run(base + (dir / "r1").string()) == 0 && run(base + (dir / "r2").string()) == 0;
    if (ok) {
        ok = slurp(dir / "r1.json") == slurp(dir / "r2.json") &&
             !slurp(dir / "r1.json").empty();
    }
    bool weights_ok =
        run("weights --data " + csv.string() + " --outcome y --g x2 --seed 4 --out " +
            (dir / "w1").string()) == 0 &&
        run("weights --data " + csv.string() + " --outcome y --g x2 --seed 4 --out " +
            (dir / "w2").string()) == 0 &&
        slurp(dir / "w1_weights.csv") == slurp(dir / "w2_weights.csv") &&
        slurp(dir / "w1.json") == slurp(dir / "w2.json");
    report(12, "identical seed and flags produce byte-identical artifacts", ok && weights_ok);
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: acceptance <path-to-cli-binary>\n";
        return 1;
    }
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();
    criterion6();
    criterion7();
    criterion8();
    criterion9();
    criterion10();
    criterion11();
    criterion12(argv[1]);
    if (g_failed == 0) {
        std::cout << "acceptance: all criteria passed" << std::endl;
        return 0;
    }
    std::cout << "acceptance: " << g_failed << " criteria failed" << std::endl;
    return 1;
}
