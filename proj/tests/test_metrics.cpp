#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "isac/metrics.hpp"
#include "isac/rng.hpp"

using isac::CommLink;
using isac::MetricConfig;
using isac::SenseLink;
using isac::SlotConfig;

namespace {

struct Scenario {
    SlotConfig slot;
    CommLink comm;
    SenseLink sense;
    MetricConfig cfg;
};

Scenario baseline() {
    return {};  // struct defaults are the reference scenario throughout
}

double eff_at(const Scenario& sc, int lp) {
    SlotConfig s = sc.slot;
    s.L_p = lp;
    return isac::efficiency(isac::ergodic_capacity(s, sc.comm).capacity,
                            isac::ergodic_crb(sc.sense, lp), sc.cfg);
}

// exhaustive integer search, the oracle the fractional programming must match
int brute_force_argmax(const Scenario& sc, double* best_out = nullptr) {
    int best_lp = 1;
    double best = eff_at(sc, 1);
    for (int lp = 2; lp <= sc.slot.L - 1; ++lp) {
        double e = eff_at(sc, lp);
        if (e > best + 1e-12 * std::abs(best)) {
            best = e;
            best_lp = lp;
        }
    }
    if (best_out) *best_out = best;
    return best_lp;
}

}  // namespace

TEST_CASE("efficiency basics", "[metrics]") {
    MetricConfig cfg;
    CHECK(isac::efficiency(10.0, 0.0, cfg) == 10.0);  // kappa = 1
    CHECK(isac::efficiency(0.0, 5.0, cfg) == 0.0);
    cfg.kappa = 0.0;
    CHECK(isac::efficiency(10.0, 2.0, cfg) == 5.0);
    CHECK_THROWS_AS(isac::efficiency(10.0, 0.0, cfg), std::domain_error);
    cfg.kappa = 1.0;
    CHECK_THROWS_AS(isac::efficiency(-1.0, 0.0, cfg), std::domain_error);
    CHECK_THROWS_AS(isac::efficiency(1.0, -0.5, cfg), std::domain_error);
}

TEST_CASE("metric config validation", "[metrics]") {
    MetricConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.eta = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.eta = 1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = MetricConfig{};
    cfg.kappa = -1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = MetricConfig{};
    cfg.u_c_th = 1.5;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = MetricConfig{};
    cfg.u_d_th = -0.1;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("efficiency curve of the reference scenario", "[metrics]") {
    auto sc = baseline();
    std::vector<double> e;
    for (int lp = 1; lp <= 13; ++lp) e.push_back(eff_at(sc, lp));

    // interior peak at L_p = 6; value frozen from a 50-digit evaluation
    int peak = 0;
    for (int i = 1; i < 13; ++i)
        if (e[i] > e[peak]) peak = i;
    CHECK(peak + 1 == 6);
    CHECK_THAT(e[5], Catch::Matchers::WithinRel(974726322.35241884, 1e-9));
    // rises to the peak, falls after: unimodal
    for (int i = 0; i < peak; ++i) CHECK(e[i] < e[i + 1]);
    for (int i = peak; i < 12; ++i) CHECK(e[i] > e[i + 1]);
}

TEST_CASE("optimizer finds the reference optimum", "[metrics]") {
    auto sc = baseline();
    auto rep = isac::optimize_pilot_length(sc.slot, sc.comm, sc.sense, sc.cfg);
    CHECK(rep.l_p_opt == 6);
    CHECK(rep.l_p_opt == brute_force_argmax(sc));
    CHECK(rep.converged);
    CHECK(rep.iterations >= 1);
    CHECK(rep.iterations == static_cast<int>(rep.candidates_examined.size()));

    // the continuous optimum dominates every integer value; here it peaks
    // near x = 6.5 and tops the integer max by about half a percent
    CHECK(rep.q_star >= eff_at(sc, 6) * (1.0 - 1e-12));
    CHECK(rep.q_star <= eff_at(sc, 6) * 1.01);
}

TEST_CASE("q-sequence is nondecreasing and ends at a vanishing residual", "[metrics]") {
    auto sc = baseline();
    auto rep = isac::optimize_pilot_length(sc.slot, sc.comm, sc.sense, sc.cfg);
    for (size_t i = 0; i + 1 < rep.candidates_examined.size(); ++i) {
        double a = rep.candidates_examined[i].second;
        double b = rep.candidates_examined[i + 1].second;
        CHECK(b >= a - 1e-12 * std::abs(a));
    }
    // F(q*) = max_x [C(x) - q*(kappa + scale/x)] must be ~0 at the fixed point
    double scale = isac::detail::ergodic_crb_scale(sc.sense, isac::PathLossMode::range_derated);
    double q = rep.q_star;
    auto q2 = [&](double x) {
        return isac::ergodic_capacity_relaxed(sc.slot, sc.comm, x) - q * (sc.cfg.kappa + scale / x);
    };
    auto [x, res] = isac::detail::golden_max(q2, 1.0, sc.slot.L - 1.0);
    CHECK(std::abs(res) <= 2e-9 * std::max(1.0, q));
}

TEST_CASE("optimizer agrees with brute force on randomized scenarios", "[metrics]") {
    isac::RngStream rng(777, 0);
    for (int trial = 0; trial < 12; ++trial) {
        Scenario sc = baseline();
        sc.slot.L = 6 + static_cast<int>(rng.uniform01() * 4) * 4;  // 6, 10, 14, 18
        sc.slot.L_p = 1;
        sc.comm.gamma_p = std::pow(10.0, (-5.0 + 30.0 * rng.uniform01()) / 10.0);
        sc.comm.gamma_d = std::pow(10.0, (-5.0 + 30.0 * rng.uniform01()) / 10.0);
        sc.comm.sigma1_sq = 0.5 + 3.5 * rng.uniform01();
        sc.sense.d = 50.0 + 450.0 * rng.uniform01();
        sc.sense.sigma2_sq = 0.5 + 1.5 * rng.uniform01();
        sc.sense.A_s = 2.0 * sc.sense.sigma2_sq * 5.0 * rng.uniform01();
        sc.cfg.kappa = std::pow(10.0, -2.0 + 3.0 * rng.uniform01());

        double best_bf = 0.0;
        int lp_bf = brute_force_argmax(sc, &best_bf);
        auto rep = isac::optimize_pilot_length(sc.slot, sc.comm, sc.sense, sc.cfg);
        CHECK(rep.converged);
        // value-level agreement; argmax equality additionally when the top two
        // integers are well separated
        double e_opt = eff_at(sc, rep.l_p_opt);
        CHECK(e_opt >= best_bf * (1.0 - 1e-12));
        double second = 0.0;
        for (int lp = 1; lp <= sc.slot.L - 1; ++lp)
            if (lp != lp_bf) second = std::max(second, eff_at(sc, lp));
        if (best_bf - second > 1e-9 * best_bf) CHECK(rep.l_p_opt == lp_bf);
    }
}

TEST_CASE("saturated estimation drives the optimum to the lower boundary", "[metrics]") {
    // at 40 dB both SNRs one pilot already estimates nearly perfectly, and a
    // huge cross section makes the bound term negligible next to kappa, so
    // the ratio reduces to the capacity alone -- strictly decreasing in L_p
    auto sc = baseline();
    sc.comm.gamma_p = 1e4;
    sc.comm.gamma_d = 1e4;
    sc.sense.s_rcs = 1e12;
    auto rep = isac::optimize_pilot_length(sc.slot, sc.comm, sc.sense, sc.cfg);
    CHECK(rep.l_p_opt == 1);
    CHECK(rep.l_p_opt == brute_force_argmax(sc));
    CHECK(rep.converged);
}

TEST_CASE("golden-section maximiser honours the search box", "[metrics]") {
    auto at = [](double m) { return [m](double x) { return -(x - m) * (x - m); }; };
    auto [x1, f1] = isac::detail::golden_max(at(7.0), 1.0, 13.0);
    CHECK_THAT(x1, Catch::Matchers::WithinAbs(7.0, 1e-6));
    CHECK_THAT(f1, Catch::Matchers::WithinAbs(0.0, 1e-12));
    // off-box maxima clamp to the nearer edge
    auto [x2, f2] = isac::detail::golden_max(at(20.0), 1.0, 13.0);
    CHECK_THAT(x2, Catch::Matchers::WithinAbs(13.0, 1e-6));
    auto [x3, f3] = isac::detail::golden_max(at(-5.0), 1.0, 13.0);
    CHECK_THAT(x3, Catch::Matchers::WithinAbs(1.0, 1e-6));
    // degenerate box
    auto [x4, f4] = isac::detail::golden_max(at(0.0), 3.0, 3.0);
    CHECK(x4 == 3.0);
    CHECK(f4 == -9.0);
}

TEST_CASE("optimum is invariant under capacity rescaling", "[metrics]") {
    auto sc = baseline();
    auto rep1 = isac::optimize_pilot_length(sc.slot, sc.comm, sc.sense, sc.cfg);
    sc.slot.B *= 1000.0;
    auto rep2 = isac::optimize_pilot_length(sc.slot, sc.comm, sc.sense, sc.cfg);
    CHECK(rep1.l_p_opt == rep2.l_p_opt);
    CHECK_THAT(rep2.q_star, Catch::Matchers::WithinRel(1000.0 * rep1.q_star, 1e-9));
}

TEST_CASE("pilot profile structure", "[metrics]") {
    auto sc = baseline();
    auto rows = isac::pilot_profile(sc.slot, sc.comm, sc.sense, sc.cfg);
    REQUIRE(rows.size() == 13);
    double cr_max = 0.0;
    for (int i = 0; i < 13; ++i) {
        CHECK(rows[i].L_p == i + 1);
        CHECK(rows[i].capacity_ratio <= 1.0);
        CHECK(rows[i].capacity_ratio > 0.0);
        // bound scales exactly as 1/L_p, so its ratio is L_p/(L-1)
        CHECK_THAT(rows[i].crb_ratio, Catch::Matchers::WithinRel((i + 1) / 13.0, 1e-12));
        cr_max = std::max(cr_max, rows[i].capacity_ratio);
    }
    CHECK(cr_max == 1.0);
}

TEST_CASE("utility curve of the reference scenario", "[metrics]") {
    auto sc = baseline();  // eta = 0.5
    std::vector<double> u;
    for (int lp = 1; lp <= 13; ++lp)
        u.push_back(isac::utility(sc.slot, sc.comm, sc.sense, sc.cfg, lp));
    int peak = 0;
    for (int i = 1; i < 13; ++i)
        if (u[i] > u[peak]) peak = i;
    CHECK(peak + 1 == 4);  // interior maximum
    CHECK_THAT(u[3], Catch::Matchers::WithinRel(0.5930577, 1e-6));
    for (double v : u) {
        CHECK(v > 0.0);
        CHECK(v < 1.0);
    }
    CHECK_THROWS_AS(isac::utility(sc.slot, sc.comm, sc.sense, sc.cfg, 0), std::domain_error);
    CHECK_THROWS_AS(isac::utility(sc.slot, sc.comm, sc.sense, sc.cfg, 14), std::domain_error);
}

TEST_CASE("utility weight extremes collapse to the dominant ratio", "[metrics]") {
    auto sc = baseline();
    // capacity peaks at L_p = 2 here; bound ratio peaks at L_p = 13
    sc.cfg.eta = 1.0 - 1e-9;
    CHECK_THAT(isac::utility(sc.slot, sc.comm, sc.sense, sc.cfg, 2),
               Catch::Matchers::WithinAbs(1.0, 1e-8));
    sc.cfg.eta = 1e-9;
    CHECK_THAT(isac::utility(sc.slot, sc.comm, sc.sense, sc.cfg, 13),
               Catch::Matchers::WithinAbs(1.0, 1e-8));
}

TEST_CASE("feasible set of the reference scenario", "[metrics]") {
    auto sc = baseline();  // both thresholds 0.2
    auto set = isac::feasible_pilot_set(sc.slot, sc.comm, sc.sense, sc.cfg);
    REQUIRE(set.size() == 9);
    for (int i = 0; i < 9; ++i) CHECK(set[i] == i + 3);  // {3, ..., 11}

    sc.cfg.u_c_th = 0.0;
    sc.cfg.u_d_th = 0.0;
    CHECK(isac::feasible_pilot_set(sc.slot, sc.comm, sc.sense, sc.cfg).size() == 13);

    sc.cfg.u_c_th = 1.0;
    sc.cfg.u_d_th = 1.0;
    CHECK(isac::feasible_pilot_set(sc.slot, sc.comm, sc.sense, sc.cfg).empty());

    // tighter thresholds can only shrink the set
    sc.cfg.u_c_th = 0.5;
    sc.cfg.u_d_th = 0.5;
    auto tight = isac::feasible_pilot_set(sc.slot, sc.comm, sc.sense, sc.cfg);
    for (int lp : tight)
        CHECK((lp >= 3 && lp <= 11));
}
