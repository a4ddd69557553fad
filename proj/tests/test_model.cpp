#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "prtbw/model.hpp"

using namespace prtbw;

TEST_CASE("rho_prime closed forms") {
    CHECK(rho_prime(Dispersion::entropy(), -1.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rho_prime(Dispersion::quadratic(false), -2.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rho_prime(Dispersion::quadratic(true), 1.0) == doctest::Approx(0.0));
    CHECK_THROWS_AS(rho_prime(Dispersion::entropy(), std::nan("")), std::domain_error);
}

TEST_CASE("rho values at zero") {
    CHECK(rho(Dispersion::entropy(), 0.0) == doctest::Approx(-std::exp(-1.0)).epsilon(1e-12));
    CHECK(rho(Dispersion::quadratic(false), 0.0) == doctest::Approx(0.0));
    CHECK(rho(Dispersion::quadratic(true), 0.0) == doctest::Approx(0.0));
}

TEST_CASE("rho/rho_prime agree with central differences") {
    const double eps = 1e-6;
    for (Dispersion d : {Dispersion::entropy(), Dispersion::quadratic(false)}) {
        for (double t = -10.0; t <= 10.0; t += 0.5) {
            const double fd = (rho(d, t + eps) - rho(d, t - eps)) / (2.0 * eps);
            const double an = rho_prime(d, t);
            const double scale = std::max(1.0, std::abs(an));
            CHECK(std::abs(fd - an) / scale <= 1e-6);
        }
    }
    // spec'd spot checks at t in {-2, 0, 2}
    for (Dispersion d : {Dispersion::entropy(), Dispersion::quadratic(false)}) {
        for (double t : {-2.0, 0.0, 2.0}) {
            const double fd = (rho(d, t + eps) - rho(d, t - eps)) / (2.0 * eps);
            CHECK(std::abs(fd - rho_prime(d, t)) / std::max(1.0, std::abs(rho_prime(d, t))) <=
                  1e-6);
        }
    }
}

TEST_CASE("strict concavity on a grid (nonneg=false)") {
    for (Dispersion d : {Dispersion::entropy(), Dispersion::quadratic(false)}) {
        for (double t = -8.0; t <= 8.0; t += 0.25) CHECK(rho_second(d, t) < 0.0);
    }
}

TEST_CASE("entropy weights strictly positive for any finite dual value") {
    for (double t : {-50.0, -1.0, 0.0, 3.0, 40.0})
        CHECK(rho_prime(Dispersion::entropy(), t) > 0.0);
}

TEST_CASE("dataset validation") {
    Dataset d;
    d.z = VectorXi(4);
    d.z << 1, 0, 1, 0;
    d.X = MatrixXd::Zero(4, 2);

    CHECK_NOTHROW(d.validate());

    SUBCASE("non-finite covariate rejected") {
        d.X(2, 1) = std::nan("");
        CHECK_THROWS_AS(d.validate(), std::invalid_argument);
    }
    SUBCASE("single-arm data rejected") {
        d.z << 1, 1, 1, 1;
        CHECK_THROWS_AS(d.validate(), std::invalid_argument);
    }
    SUBCASE("transport: y and z only required on analysis units") {
        VectorXi r(4);
        r << 1, 1, 0, 0;
        d.r = r;
        d.z << 1, 0, 7, -3;  // garbage on target units is ignored
        CHECK_NOTHROW(d.validate());
    }
}

TEST_CASE("partition validation") {
    BalancePartition part = BalancePartition::with_g(3, {1});
    CHECK_NOTHROW(part.validate(3));
    part.c_idx.push_back(1);  // now overlaps g
    CHECK_THROWS_AS(part.validate(3), std::invalid_argument);
    BalancePartition gap;
    gap.c_idx = {0};
    CHECK_THROWS_AS(gap.validate(2), std::invalid_argument);
}
