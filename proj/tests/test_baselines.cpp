#include "semmec/baselines.hpp"

#include <doctest.h>

#include <cmath>

using namespace semmec;

namespace {

SystemConfig defaults() {
    SystemConfig cfg = table_one_defaults();
    finalize(cfg);
    return cfg;
}

} // namespace

TEST_CASE("no-semantics baseline never extracts") {
    SystemConfig cfg = defaults();
    SystemConfig ns = ns_config(cfg);
    CHECK(ns.a == 0.0);
    CHECK(ns.beta_min == 1.0);
    Simulation sim(cfg, Policy::ns, 4);
    for (int t = 0; t < 500; ++t) {
        const auto& out = sim.step();
        for (double b : out.plan.decision.beta) REQUIRE(b == 1.0);
        for (std::size_t n = 0; n < cfg.num_tds; ++n) REQUIRE(min_chi(sim.states()[n]) == 1.0);
    }
}

TEST_CASE("no-local baseline keeps the device CPU idle") {
    SystemConfig cfg = defaults();
    Simulation sim(cfg, Policy::nl, 4);
    double offloaded = 0.0;
    for (int t = 0; t < 500; ++t) {
        const auto& out = sim.step();
        for (std::size_t n = 0; n < cfg.num_tds; ++n) {
            REQUIRE(out.plan.decision.f_local[n] == 0.0);
            offloaded += out.plan.decision.r_uplink[n] * out.plan.decision.tau_u[n];
        }
    }
    CHECK(offloaded > 0.0);
}

TEST_CASE("myopic baseline") {
    SystemConfig cfg = defaults();
    SlotObservation obs;
    for (std::size_t n = 0; n < cfg.num_tds; ++n) {
        obs.gains.push_back(path_loss_gain(cfg.distances[n], cfg));
        obs.arrivals.push_back(1e6 * (n + 1));
        obs.min_chi.push_back(cfg.beta_min);
    }
    SUBCASE("zero target gives the zero decision") {
        SystemConfig c = cfg;
        c.R_avg = 0.0;
        auto p = plan_myopic(obs, c);
        for (std::size_t n = 0; n < c.num_tds; ++n) {
            CHECK(p.decision.f_local[n] == 0.0);
            CHECK(p.decision.r_uplink[n] == 0.0);
            CHECK(p.decision.f_remote[n] == 0.0);
        }
        CHECK_FALSE(p.infeasible_target);
    }
    SUBCASE("rate target binds") {
        auto p = plan_myopic(obs, cfg);
        REQUIRE_FALSE(p.infeasible_target);
        const auto& d = p.decision;
        for (std::size_t n = 0; n < cfg.num_tds; ++n) {
            double rate = d.f_local[n] / cfg.intensity_I[n] +
                          d.tau_u[n] * d.r_uplink[n] / (d.beta[n] * cfg.slot_tau);
            CHECK(rate == doctest::Approx(cfg.R_avg).epsilon(1e-6));
        }
        CHECK(check_decision(d, obs.gains, cfg).empty());
    }
    SUBCASE("unreachable target is flagged") {
        SystemConfig c = cfg;
        c.R_avg = 1e9;
        CHECK(plan_myopic(obs, c).infeasible_target);
    }
    SUBCASE("arrivals do not matter") {
        auto a = plan_myopic(obs, cfg);
        SlotObservation other = obs;
        for (auto& x : other.arrivals) x *= 7.0;
        auto b = plan_myopic(other, cfg);
        CHECK(a.decision.f_local == b.decision.f_local);
        CHECK(a.decision.r_uplink == b.decision.r_uplink);
        CHECK(a.decision.f_remote == b.decision.f_remote);
    }
}

TEST_CASE("exhaustive baseline") {
    SystemConfig cfg = defaults();
    Simulation sim(cfg, Policy::drmsa, 9);
    for (int t = 0; t < 300; ++t) sim.step();
    const auto& states = sim.states();
    for (int t = 0; t < 20; ++t) {
        auto obs = sim.observe();
        auto warm = warm_start(std::vector<double>(cfg.num_tds, 0.6), cfg);
        auto drmsa = plan_slot(states, obs, cfg, BcdConfig{}, warm);
        auto single = plan_exh(states, obs, cfg, BcdConfig{}, warm, 1, 9, t);
        CHECK(single.decision.f_local == drmsa.decision.f_local);
        CHECK(single.decision.beta == drmsa.decision.beta);
        CHECK(single.decision.f_remote == drmsa.decision.f_remote);
        CHECK(single.local_objective == drmsa.local_objective);
        auto many = plan_exh(states, obs, cfg, BcdConfig{}, warm, 8, 9, t);
        CHECK(many.local_objective + many.remote_objective <=
              drmsa.local_objective + drmsa.remote_objective);
        sim.apply(obs, std::move(drmsa));
    }
}
