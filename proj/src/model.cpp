#include "prtbw/model.hpp"

#include <algorithm>
#include <set>

namespace prtbw {

void Dataset::validate() const {
    const int nn = n();
    if (nn == 0) throw std::invalid_argument("dataset is empty");
    if (X.rows() != nn) throw std::invalid_argument("X row count does not match z length");
    if (y && y->size() != nn) throw std::invalid_argument("y length does not match z length");
    if (r && r->size() != nn) throw std::invalid_argument("r length does not match z length");

    int n1 = 0, n0 = 0;
    for (int i = 0; i < nn; ++i) {
        if (r) {
            int ri = (*r)(i);
            if (ri != 0 && ri != 1) throw std::invalid_argument("r must be 0/1");
            if (ri == 0) continue;  // y, z not required on target-population units
        }
        if (z(i) != 0 && z(i) != 1) throw std::invalid_argument("z must be 0/1 on analysis units");
        if (z(i) == 1)
            ++n1;
        else
            ++n0;
        if (y && !std::isfinite((*y)(i)))
            throw std::invalid_argument("non-finite outcome at row " + std::to_string(i));
    }
    if (n1 == 0 || n0 == 0)
        throw std::invalid_argument("need at least one treated and one control analysis unit");
    for (int i = 0; i < nn; ++i)
        for (int j = 0; j < X.cols(); ++j)
            if (!std::isfinite(X(i, j)))
                throw std::invalid_argument("non-finite covariate at row " + std::to_string(i) +
                                            ", column " + std::to_string(j));
}

void BalancePartition::validate(int p) const {
    std::set<int> seen;
    for (int j : c_idx) {
        if (j < 0 || j >= p) throw std::invalid_argument("c index out of range");
        if (!seen.insert(j).second) throw std::invalid_argument("duplicate index in partition");
    }
    for (int j : g_idx) {
        if (j < 0 || j >= p) throw std::invalid_argument("g index out of range");
        if (!seen.insert(j).second) throw std::invalid_argument("c and g sets must be disjoint");
    }
    if (static_cast<int>(seen.size()) != p)
        throw std::invalid_argument("partition must cover every basis column");
}

// Entropy: D(t) = t log t, h(t) = (1-t)log(1-t), rho(t) = -exp(-t-1).
// Quadratic: D(t) = t^2, h(t) = (1-t)^2, rho(t) = -t^2/4; the nonneg variant
// hinges rho' at 0 so the recovered weights satisfy w >= 0.
double rho(const Dispersion& d, double t) {
    if (!std::isfinite(t)) throw std::domain_error("rho: non-finite argument");
    switch (d.kind) {
        case DispersionKind::Entropy:
            return -std::exp(-t - 1.0);
        case DispersionKind::Quadratic:
            if (d.nonneg && t > 0.0) return 0.0;
            return -t * t / 4.0;
    }
    return 0.0;
}

double rho_prime(const Dispersion& d, double t) {
    if (!std::isfinite(t)) throw std::domain_error("rho_prime: non-finite argument");
    switch (d.kind) {
        case DispersionKind::Entropy:
            return std::exp(-t - 1.0);
        case DispersionKind::Quadratic:
            if (d.nonneg) return std::max(-t / 2.0, 0.0);
            return -t / 2.0;
    }
    return 0.0;
}

double rho_second(const Dispersion& d, double t) {
    if (!std::isfinite(t)) throw std::domain_error("rho_second: non-finite argument");
    switch (d.kind) {
        case DispersionKind::Entropy:
            return -std::exp(-t - 1.0);
        case DispersionKind::Quadratic:
            if (d.nonneg && t > 0.0) return 0.0;
            return -0.5;
    }
    return 0.0;
}

}  // namespace prtbw
