// Self-checks of the reference implementations: if the oracle is wrong,
// every cross-validation below it is meaningless.

#include <cmath>

#include <doctest.h>

#include "hypflow/ambient.hpp"
#include "oracle.hpp"

using namespace oracle;

namespace {
double rel(double got, double want) {
    return std::abs(got - want) / std::max(1.0, std::abs(want));
}
} // namespace

TEST_CASE("fornberg reproduces classical centered stencils") {
    const std::vector<double> x{-2, -1, 0, 1, 2};
    const auto w1 = fornberg_weights(0.0, x, 1);
    const double d1[] = {1.0 / 12, -8.0 / 12, 0.0, 8.0 / 12, -1.0 / 12};
    for (int i = 0; i < 5; ++i) CHECK(w1[i] == doctest::Approx(d1[i]).epsilon(1e-14));

    const auto w2 = fornberg_weights(0.0, x, 2);
    const double d2[] = {-1.0 / 12, 16.0 / 12, -30.0 / 12, 16.0 / 12, -1.0 / 12};
    for (int i = 0; i < 5; ++i) CHECK(w2[i] == doctest::Approx(d2[i]).epsilon(1e-14));
}

TEST_CASE("adaptive simpson") {
    CHECK(rel(integrate([](double t) { return std::sin(t); }, 0.0, M_PI), 2.0) < 1e-12);
    CHECK(rel(integrate([](double t) { return std::pow(t, 5); }, 0.0, 1.0), 1.0 / 6) < 1e-12);
    CHECK(rel(integrate([](double t) { return std::exp(-t * t); }, -6.0, 6.0),
              std::sqrt(M_PI)) < 1e-12);
}

TEST_CASE("gamma-function sphere volumes") {
    CHECK(rel(unit_sphere_volume_gamma(0), 2.0) < 1e-14);
    CHECK(rel(unit_sphere_volume_gamma(1), 2.0 * M_PI) < 1e-14);
    CHECK(rel(unit_sphere_volume_gamma(2), 4.0 * M_PI) < 1e-14);
    CHECK(rel(unit_sphere_volume_gamma(3), 2.0 * M_PI * M_PI) < 1e-14);
    CHECK(rel(unit_sphere_volume_gamma(7), std::pow(M_PI, 4) / 3.0) < 1e-14);
}

TEST_CASE("reduced weights integrate to omega_m") {
    for (auto [field, n] : {std::pair{hypflow::Field::R, 3},
                            {hypflow::Field::C, 2},
                            {hypflow::Field::H, 2}}) {
        const auto amb = hypflow::make_ambient(field, n);
        const double total = integrate(
            [&](double t) { return weight(amb, t); }, 0.0, theta_max(amb));
        CHECK(rel(total, unit_sphere_volume_gamma(amb.m)) < 1e-12);
    }
}

TEST_CASE("family derivatives are consistent") {
    for (const Family& fam :
         {affine_exp(0.3), legendre2(0.4), cos2theta(0.2)}) {
        for (double t : {0.3, 0.9, 1.4}) {
            const double h = 1e-5;
            const double dfd = (fam.f(t + h) - fam.f(t - h)) / (2 * h);
            const double d2fd = (fam.f(t + h) - 2 * fam.f(t) + fam.f(t - h)) / (h * h);
            CHECK(rel(fam.df(t), dfd) < 1e-8);
            CHECK(rel(fam.d2f(t), d2fd) < 1e-4);
        }
    }
}

TEST_CASE("brute mass limits hit the frozen anchors") {
    const auto r3 = hypflow::make_ambient(hypflow::Field::R, 3);
    const auto c2 = hypflow::make_ambient(hypflow::Field::C, 2);
    const auto h2 = hypflow::make_ambient(hypflow::Field::H, 2);

    CHECK(rel(hawking_mass_limit_brute(r3, legendre2(0.3)), frozen::hml_p2_03) < 1e-10);
    CHECK(rel(hawking_mass_limit_brute(r3, legendre2(0.5)), frozen::hml_p2_05) < 1e-10);

    CHECK(rel(by_mass_limit_brute(c2, cos2theta(0.2)), frozen::byl_c_020) < 1e-10);
    CHECK(rel(by_mass_limit_brute(c2, cos2theta(0.3)), frozen::byl_c_030) < 1e-10);
    CHECK(rel(by_mass_limit_brute(h2, cos2theta(0.15)), frozen::byl_h_015) < 1e-10);
    CHECK(rel(by_mass_limit_brute(h2, cos2theta(0.25)), frozen::byl_h_025) < 1e-10);

    // small-eps Taylor law Q ~ (16 pi / 3 sqrt 2) eps^2 to first order
    const double q = by_mass_limit_brute(c2, cos2theta(0.01));
    CHECK(rel(q, frozen::byl_c_001) < 1e-10);
    CHECK(std::abs(q / (frozen::byl_c_taylor * 1e-4) - 1.0) < 2e-4);

    // on round data both limits vanish identically
    CHECK(std::abs(hawking_mass_limit_brute(r3, constant(0.7))) < 1e-13);
    CHECK(std::abs(by_mass_limit_brute(h2, constant(-0.2))) < 1e-12);
}
