#include "prtbw/simlab.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

#include "prtbw/rng.hpp"

namespace prtbw {

HyperRow hyper_table(int p, double pct_treated) {
    const bool treated20 = std::abs(pct_treated - 0.20) < 1e-9;
    const bool treated40 = std::abs(pct_treated - 0.40) < 1e-9;
    if (p == 20 && treated20) return {{0.75, 1.0, 2.0}, {0.50, 1.0, 2.0}};
    if (p == 20 && treated40) return {{0.50, 0.75, 1.0}, {0.50, 1.0, 2.0}};
    if (p == 100 && treated20) return {{2.0, 4.0, 5.0}, {0.25, 0.75, 1.25}};
    if (p == 100 && treated40) return {{1.0, 2.0, 3.0}, {0.25, 0.75, 1.25}};
    throw std::invalid_argument("hyper_table: no row for this (p, pct_treated) cell");
}

namespace {

// Standard normal truncated at +/-3, rescaled to unit variance.
// Var of the truncated variable is 1 - 6*phi(3)/(2*Phi(3)-1).
const double kTruncBound = 3.0;
const double kPhi3 = std::exp(-4.5) / std::sqrt(2.0 * M_PI);
const double kMass = std::erf(3.0 / std::sqrt(2.0));  // P(|N| < 3)
const double kTruncSd = std::sqrt(1.0 - 2.0 * kTruncBound * kPhi3 / kMass);

double draw_v(RngStream& rng) {
    for (;;) {
        const double x = rng.normal();
        if (std::abs(x) < kTruncBound) return x / kTruncSd;
    }
}

double sigmoid(double t) { return 1.0 / (1.0 + std::exp(-std::clamp(t, -500.0, 500.0))); }

}  // namespace

Scenario::Scenario(const ScenarioConfig& cfg) : cfg_(cfg) {
    const int p = cfg.p;
    if (p < 4 || p % 2 != 0) throw std::invalid_argument("Scenario: p must be even and >= 4");

    TruthRecord& t = truth_;
    t.ps_coef.resize(p);
    t.mu0_coef = VectorXd::Constant(p, 0.25);
    t.mu1_coef.resize(p);
    t.mu1_intercept = 1.0;

    // Propensity slopes: magnitudes cycle {0.5, 1.33, 2.16, 3}/gamma, signs
    // alternate by index so each magnitude appears with both signs.
    const double mags[4] = {0.5, 1.33, 2.16, 3.0};
    for (int j = 0; j < p; ++j) {
        const double a = mags[j % 4] / cfg.gamma;
        t.ps_coef(j) = (j % 2 == 0 ? a : -a);
    }

    // Outcome slopes: modifiers get 0.25 +/- c with c cycling
    // {0.75, 0.6, 0.45, 0.3} * delta; the rest stay at 0.25 (no modification).
    const double cmags[4] = {0.75, 0.6, 0.45, 0.3};
    const int per_cycle = static_cast<int>(std::lround(4.0 * cfg.theta));
    int mod_counter = 0;
    for (int j = 0; j < p; ++j) {
        const bool modifier = (j % 4) < per_cycle;
        if (modifier) {
            const double c = cmags[mod_counter % 4] * cfg.delta_het;
            t.mu1_coef(j) = 0.25 + (mod_counter % 2 == 0 ? c : -c);
            t.modifier_idx.push_back(j);
            ++mod_counter;
        } else {
            t.mu1_coef(j) = 0.25;
        }
    }

    // Closed-form ATE: E[X_j] = 0 for continuous columns (j < p/2), 1/2 for
    // the binary indicators I[V < 0].
    t.true_ate = t.mu1_intercept;
    for (int j = p / 2; j < p; ++j) t.true_ate += (t.mu1_coef(j) - t.mu0_coef(j)) * 0.5;

    // Intercept calibration: draw a frozen covariate panel once, then bisect
    // on the monotone map alpha0 -> mean propensity.
    const int cal_n = 100000;
    RngStream rng(cfg.seed, 0xCA1);
    VectorXd lin(cal_n);
    for (int i = 0; i < cal_n; ++i) {
        double s = 0;
        for (int j = 0; j < p; ++j) {
            const double v = draw_v(rng);
            const double x = j < p / 2 ? v : (v < 0 ? 1.0 : 0.0);
            s += t.ps_coef(j) * x;
        }
        lin(i) = s;
    }
    double lo = -60.0, hi = 60.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        double mean = 0;
        for (int i = 0; i < cal_n; ++i) mean += sigmoid(mid + lin(i));
        mean /= cal_n;
        (mean < cfg.pct_treated ? lo : hi) = mid;
        if (hi - lo < 1e-12) break;
    }
    t.ps_intercept = 0.5 * (lo + hi);
}

Dataset Scenario::generate(int rep) const {
    const int n = cfg_.n, p = cfg_.p;
    RngStream rng(cfg_.seed, 0x5EED0000ULL + static_cast<std::uint64_t>(rep));
    Dataset data;
    data.X.resize(n, p);
    data.z.resize(n);
    data.y = VectorXd(n);
    for (int i = 0; i < n; ++i) {
        double lin = truth_.ps_intercept;
        for (int j = 0; j < p; ++j) {
            const double v = draw_v(rng);
            data.X(i, j) = j < p / 2 ? v : (v < 0 ? 1.0 : 0.0);
            lin += truth_.ps_coef(j) * data.X(i, j);
        }
        data.z(i) = rng.bernoulli(sigmoid(lin)) ? 1 : 0;
        const double mu = data.z(i) == 1
                              ? truth_.mu1_intercept + truth_.mu1_coef.dot(data.X.row(i))
                              : truth_.mu0_coef.dot(data.X.row(i));
        (*data.y)(i) = mu + rng.normal();
    }
    return data;
}

double Scenario::monte_carlo_ate(int draws, std::uint64_t stream) const {
    RngStream rng(cfg_.seed, stream);
    double acc = 0;
    for (int i = 0; i < draws; ++i) {
        double tau = truth_.mu1_intercept;
        for (int j = 0; j < cfg_.p; ++j) {
            const double v = draw_v(rng);
            const double x = j < cfg_.p / 2 ? v : (v < 0 ? 1.0 : 0.0);
            tau += (truth_.mu1_coef(j) - truth_.mu0_coef(j)) * x;
        }
        acc += tau;
    }
    return acc / draws;
}

ErrorDecomposition decompose_error(const WeightSolution& w, const Dataset& data,
                                   const TruthRecord& truth) {
    if (!data.y) throw std::invalid_argument("decompose_error: outcomes required");
    ErrorDecomposition dec;
    double a = 0, b = 0, c = 0;
    for (int i : w.analysis_idx) {
        const double mu1 = truth.mu1_intercept + truth.mu1_coef.dot(data.X.row(i));
        const double mu0 = truth.mu0_coef.dot(data.X.row(i));
        const double mu_z = data.z(i) == 1 ? mu1 : mu0;
        const double wi = w.w(i);
        const double zi = data.z(i);
        a += (wi * zi * mu_z - mu1) - (wi * (1.0 - zi) * mu_z - mu0);
        b += mu1 - mu0;
        c += wi * (zi - (1.0 - zi)) * ((*data.y)(i)-mu_z);
    }
    const double m = static_cast<double>(w.m);
    dec.mismatch = a / m;
    dec.sampling = b / m - truth.true_ate;
    dec.noise = c / m;
    return dec;
}

std::vector<StudyCell> run_study(const Scenario& sc, const std::vector<EstimatorSpec>& panel,
                                 int threads) {
    if (panel.empty()) throw std::invalid_argument("run_study: empty estimator panel");
    const int R = sc.config().reps;
    const int E = static_cast<int>(panel.size());
    std::vector<std::vector<double>> est(E, std::vector<double>(R, std::numeric_limits<double>::quiet_NaN()));

    auto run_rep = [&](int r) {
        const Dataset data = sc.generate(r);
        for (int e = 0; e < E; ++e) {
            try {
                const std::optional<double> v = panel[e].fn(data);
                if (v && std::isfinite(*v)) est[e][r] = *v;
            } catch (const std::exception&) {
                // replicate-level failure recorded as NaN, never aborts the grid
            }
        }
    };

    const int nthreads = std::max(1, threads);
    if (nthreads == 1) {
        for (int r = 0; r < R; ++r) run_rep(r);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        for (int t = 0; t < nthreads; ++t)
            pool.emplace_back([&] {
                for (int r = next.fetch_add(1); r < R; r = next.fetch_add(1)) run_rep(r);
            });
        for (auto& th : pool) th.join();
    }

    const double tau = sc.truth().true_ate;
    std::vector<StudyCell> cells;
    for (int e = 0; e < E; ++e) {
        StudyCell cell;
        cell.estimator = panel[e].name;
        cell.reps = R;
        cell.estimates = est[e];
        double sum = 0, sq = 0, mse = 0;
        int k = 0;
        for (double v : est[e]) {
            if (std::isnan(v)) continue;
            sum += v;
            sq += v * v;
            mse += (v - tau) * (v - tau);
            ++k;
        }
        cell.feasible = k;
        if (k > 0) {
            const double mean = sum / k;
            cell.mse = mse / k;
            cell.abs_bias = std::abs(mean - tau);
            cell.sd = k > 1 ? std::sqrt((sq - k * mean * mean) / (k - 1)) : 0.0;
        }
        cells.push_back(std::move(cell));
    }
    return cells;
}

}  // namespace prtbw
