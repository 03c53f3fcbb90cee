#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "isac/sensing.hpp"

using isac::PathLossMode;
using isac::SenseLink;

TEST_CASE("alpha reference values, both path-loss modes", "[sensing]") {
    SenseLink link;  // defaults: s_rcs 100, d 100, gamma_ps 10, B_rms = 2e8/sqrt(12)
    // frozen from a 50-digit evaluation
    CHECK_THAT(isac::alpha_coeff(link, PathLossMode::range_derated),
               Catch::Matchers::WithinRel(42.912398797621330, 1e-12));
    CHECK_THAT(isac::alpha_coeff(link, PathLossMode::transmit_only),
               Catch::Matchers::WithinRel(3.4148601942860703e-4, 1e-12));

    // second, independently coded writings of the same two quantities
    const double pi = std::numbers::pi;
    double strict = link.c * link.c /
                    (8.0 * pi * pi * link.gamma_ps * link.s_rcs * link.B_rms * link.B_rms);
    double derated = link.c * link.c * link.d * link.d /
                     (2.0 * pi * link.gamma_ps * link.s_rcs * link.B_rms * link.B_rms);
    CHECK_THAT(isac::alpha_coeff(link, PathLossMode::transmit_only),
               Catch::Matchers::WithinRel(strict, 1e-14));
    CHECK_THAT(isac::alpha_coeff(link, PathLossMode::range_derated),
               Catch::Matchers::WithinRel(derated, 1e-14));
}

TEST_CASE("alpha scaling laws", "[sensing]") {
    SenseLink link, wide = link, hot = link;
    wide.B_rms *= 2.0;
    hot.gamma_ps *= 2.0;
    // doubling factors are exact binary scalings, so equality is exact too
    CHECK(isac::alpha_coeff(wide) == isac::alpha_coeff(link) / 4.0);
    CHECK(isac::alpha_coeff(hot) == isac::alpha_coeff(link) / 2.0);

    SenseLink fourx = link;
    fourx.d *= 2.0;
    CHECK(isac::alpha_coeff(fourx, PathLossMode::range_derated) == 4.0 * isac::alpha_coeff(link));
    CHECK(isac::alpha_coeff(fourx, PathLossMode::transmit_only) ==
          isac::alpha_coeff(link, PathLossMode::transmit_only));
}

TEST_CASE("instantaneous bound identities", "[sensing]") {
    CHECK(isac::instantaneous_crb(6.0, 3, 2.0) == 1.0);
    CHECK(isac::instantaneous_crb(6.0, 6, 2.0) == 0.5);  // inverse in L_p
    CHECK(isac::instantaneous_crb(6.0, 3, 4.0) == 0.5);  // inverse in the gain
    CHECK_THROWS_AS(isac::instantaneous_crb(0.0, 3, 2.0), std::domain_error);
    CHECK_THROWS_AS(isac::instantaneous_crb(6.0, 0, 2.0), std::domain_error);
    CHECK_THROWS_AS(isac::instantaneous_crb(6.0, 3, 0.0), std::domain_error);
    CHECK_THROWS_AS(isac::instantaneous_crb(6.0, 3, -1.0), std::domain_error);
}

TEST_CASE("inverse-gain mean reference values", "[sensing]") {
    // frozen from 50-digit evaluations of sqrt(pi/2s^2) e^-u 1F1(1/2;1;u)
    CHECK_THAT(isac::detail::rician_inverse_gain_mean(3.0, 1.0),
               Catch::Matchers::WithinRel(0.67825001985118233, 1e-12));
    // A_s = 0: plain Rayleigh, E[1/X] = sqrt(pi/(2 sigma2_sq))
    CHECK_THAT(isac::detail::rician_inverse_gain_mean(0.0, 1.0),
               Catch::Matchers::WithinRel(std::sqrt(std::numbers::pi / 2.0), 1e-14));
    CHECK_THAT(isac::detail::rician_inverse_gain_mean(0.0, 2.0),
               Catch::Matchers::WithinRel(std::sqrt(std::numbers::pi / 4.0), 1e-14));
}

TEST_CASE("ergodic bound reference value and pilot scaling", "[sensing]") {
    SenseLink link;  // A_s 3, sigma2_sq 1 plus the defaults above
    CHECK_THAT(isac::ergodic_crb(link, 1),
               Catch::Matchers::WithinRel(29.105335336348520, 1e-12));

    // delta(L_p) * L_p is constant: integrating more probes divides the
    // bound exactly, nothing else moves
    double base = isac::ergodic_crb(link, 1);
    for (int lp = 2; lp <= 50; ++lp)
        CHECK_THAT(isac::ergodic_crb(link, lp) * lp, Catch::Matchers::WithinRel(base, 1e-15));

    CHECK_THROWS_AS(isac::ergodic_crb(link, 0), std::domain_error);
}

TEST_CASE("series route agrees with the closed form", "[sensing]") {
    for (double s2 : {1.0, 2.0}) {
        for (double u : {0.0, 0.5, 1.5, 5.0}) {
            SenseLink link;
            link.sigma2_sq = s2;
            link.A_s = 2.0 * s2 * u;
            for (int lp : {1, 7, 13}) {
                double closed = isac::ergodic_crb(link, lp);
                double series = isac::ergodic_crb_series(link, lp, 400);
                CHECK_THAT(series, Catch::Matchers::WithinRel(closed, 1e-12));
            }
        }
    }
}

TEST_CASE("series edge behaviour", "[sensing]") {
    SenseLink ray;
    ray.A_s = 0.0;
    // one term is exact for Rayleigh
    CHECK_THAT(isac::ergodic_crb_series(ray, 3, 1),
               Catch::Matchers::WithinRel(isac::ergodic_crb(ray, 3), 1e-14));

    SenseLink strong;
    strong.A_s = 10.0;  // u = 5 needs a few dozen terms
    CHECK_THROWS_AS(isac::ergodic_crb_series(strong, 3, 3), isac::convergence_error);
    CHECK_THROWS_AS(isac::ergodic_crb_series(strong, 0, 10), std::domain_error);
    CHECK_THROWS_AS(isac::ergodic_crb_series(strong, 3, 0), std::domain_error);
}

TEST_CASE("link validation", "[sensing]") {
    SenseLink link;
    CHECK_NOTHROW(link.validate());
    link.sigma2_sq = 0.0;
    CHECK_THROWS_AS(link.validate(), std::invalid_argument);
    link = SenseLink{};
    link.A_s = -1.0;
    CHECK_THROWS_AS(link.validate(), std::invalid_argument);
    link = SenseLink{};
    link.d = 0.0;
    CHECK_THROWS_AS(link.validate(), std::invalid_argument);
    link = SenseLink{};
    link.B_rms = 0.0;
    CHECK_THROWS_AS(link.validate(), std::invalid_argument);
}
