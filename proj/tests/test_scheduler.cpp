#include "semmec/baselines.hpp"
#include "semmec/harness.hpp"
#include "semmec/scheduler.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace semmec;

namespace {

SystemConfig defaults(std::size_t n = 10) {
    SystemConfig cfg = table_one_defaults(n);
    finalize(cfg);
    return cfg;
}

SlotObservation observation(const SystemConfig& cfg, const std::vector<TdState>& states) {
    SlotObservation obs;
    for (std::size_t n = 0; n < cfg.num_tds; ++n) {
        obs.gains.push_back(path_loss_gain(cfg.distances[n], cfg));
        obs.arrivals.push_back(cfg.arrival_mean_lambda[n]);
        obs.min_chi.push_back(min_chi(states[n]));
    }
    return obs;
}

} // namespace

TEST_CASE("weights") {
    SystemConfig cfg = defaults();
    const double h = 2e-11;
    TdWeights w = compute_weights_td(TdState{}, h, 0, cfg);
    CHECK(w.w1 == 0.0);
    CHECK(w.w3 == 0.0);
    CHECK(w.w4 == 0.0);
    CHECK(w.c_max > 0.0);
    CHECK(w.w2 == 2.0 * w.c_max);
    CHECK(w.c_max == doctest::Approx(cfg.a * cfg.slot_tau * max_uplink_rate(h, 0, cfg) /
                                     std::pow(cfg.beta_min, cfg.k)));

    TdState s;
    s.q_local = 1e6;
    s.q_remote = 2e6;
    s.q_down = 3e5;
    s.x_q = 2e6;
    s.x_r = 5e5;
    w = compute_weights_td(s, h, 0, cfg);
    CHECK(w.w1 == 4e6);
    CHECK(w.w2 == doctest::Approx(5e5 + 2e6 + 2 * w.c_max + 2e6));
    CHECK(w.w3 == 1e7);
    CHECK(w.w4 == 3.2e6);
}

TEST_CASE("zero pressure is a fixed point") {
    SystemConfig cfg = defaults();
    std::vector<TdState> states(cfg.num_tds);
    auto obs = observation(cfg, states);
    auto plan = plan_slot(states, obs, cfg, BcdConfig{}, warm_start({}, cfg));
    const auto& d = plan.decision;
    for (std::size_t n = 0; n < cfg.num_tds; ++n) {
        CHECK(d.f_local[n] == 0.0);
        CHECK(d.r_uplink[n] == 0.0);
        CHECK(d.p_downlink[n] == 0.0);
        CHECK(d.f_remote[n] == 0.0);
    }
    double e = 0.0;
    for (auto& x : slot_energy(d, cfg)) e += x.total();
    CHECK(e == 0.0);
}

TEST_CASE("block coordinate descent never increases the objective") {
    SystemConfig cfg = defaults();
    Simulation sim(cfg, Policy::drmsa, 3);
    int checked = 0;
    for (int t = 0; t < 400; ++t) {
        auto obs = sim.observe();
        auto plan = sim.plan(obs);
        const auto& tr = plan.objective_trace;
        for (std::size_t i = 1; i < tr.size(); ++i) {
            REQUIRE(tr[i] <= tr[i - 1] + 1e-9 * (1.0 + std::abs(tr[i - 1])));
            ++checked;
        }
        sim.apply(obs, std::move(plan));
    }
    CHECK(checked > 0);
}

namespace {

struct GridCase {
    SystemConfig cfg;
    std::vector<TdState> states;
    SlotObservation obs;
};

GridCase grid_case() {
    // Two devices and budgets that do not bind: the joint grid minimum is the
    // sum of per-device grid minima. Within a device the objective splits
    // into a CPU part, an uplink part and a downlink part tied together only
    // by the queue and airtime constraints, so prefix minima over the sorted
    // grids give the exact grid optimum without visiting all 21^6 points.
    SystemConfig cfg = defaults(2);
    cfg.P_mec = 4.0;
    cfg.F_mec = 1e12;
    finalize(cfg);
    std::vector<TdState> states(2);
    states[0].q_local = 4e6;
    states[0].q_down = 2e5;
    states[0].q_remote = 1e6;
    states[0].x_q = 3e6;
    states[0].x_r = 1e6;
    states[1].q_local = 1.5e7;
    states[1].q_down = 5e4;
    states[1].q_remote = 3e5;
    states[1].x_q = 1e7;
    states[1].x_r = 4e6;
    auto obs = observation(cfg, states);
    return {cfg, states, obs};
}

// Exhaustive joint grid value of the local plus remote objective.
double joint_grid_value(const GridCase& gc) {
    const auto& cfg = gc.cfg;
    const auto& states = gc.states;
    const auto& obs = gc.obs;
    auto w = compute_weights(states, obs, cfg);
    auto G = intensity_ratios(obs, cfg);
    auto H = result_ratios(obs, cfg);

    const int P = 21;
    auto at = [&](double lo, double hi, int i) { return lo + (hi - lo) * i / (P - 1); };
    const double tau = cfg.slot_tau;
    double grid = 0.0;
    for (std::size_t n = 0; n < 2; ++n) {
        const double h = obs.gains[n];
        const double I = cfg.intensity_I[n];
        const double rmax = max_uplink_rate(h, n, cfg);
        const TdWeights& wn = w[n];
        // CPU part, prefix minimum over increasing f.
        std::vector<double> f_best(P);
        for (int i = 0; i < P; ++i) {
            double f = at(0, cfg.f_local_max[n], i);
            double v = -wn.w2 * tau * f / I + cfg.V * tau * cfg.kappa_local * f * f * f;
            f_best[i] = i == 0 ? v : std::min(f_best[i - 1], v);
        }
        // Downlink part, prefix minimum over increasing tau_d.
        std::vector<double> d_best(P);
        for (int j = 0; j < P; ++j) {
            double td = at(0, tau, j);
            double best = 0.0;
            for (int k = 0; k < P; ++k) {
                double pd = at(0, cfg.P_mec, k);
                double bits = td * downlink_rate(h, pd, cfg);
                if (bits > states[n].q_down) continue;
                best = std::min(best, -wn.w4 * bits + cfg.V * td * pd);
            }
            d_best[j] = j == 0 ? best : std::min(d_best[j - 1], best);
        }
        double best = INFINITY;
        for (int ir = 0; ir < P; ++ir)
            for (int ib = 0; ib < P; ++ib)
                for (int iu = 0; iu < P; ++iu) {
                    double r = at(0, rmax, ir);
                    double beta = at(cfg.beta_min, 1.0, ib);
                    double tu = at(0, tau, iu);
                    double sent = tu * r;
                    double bk = std::pow(beta, cfg.k);
                    double room = states[n].q_local - sent * (1 / beta - cfg.a / bk);
                    if (room < 0) continue;
                    // Largest f index that fits in the remaining queue.
                    int fi = -1;
                    while (fi + 1 < P && tau * at(0, cfg.f_local_max[n], fi + 1) / I <= room) ++fi;
                    if (fi < 0) continue;
                    double up = wn.w1 * cfg.a * sent / bk + wn.w3 * sent - wn.w2 * sent / beta +
                                cfg.V * tu * uplink_power(h, r, cfg);
                    best = std::min(best, up + f_best[fi] + d_best[P - 1 - iu]);
                }
        double remote = 0.0;
        const double cap = states[n].q_remote * G[n] * I / tau;
        for (int i = 0; i < P; ++i) {
            double f = at(0, cap, i);
            double bits = tau * f / (G[n] * I);
            remote = std::min(remote, (wn.w4 * H[n] - wn.w3) * bits +
                                          cfg.V * tau * cfg.kappa_mec * f * f * f);
        }
        grid += best + remote;
    }
    return grid;
}

double plan_value(const GridCase& gc, const PlanResult& plan) {
    auto w = compute_weights(gc.states, gc.obs, gc.cfg);
    auto G = intensity_ratios(gc.obs, gc.cfg);
    auto H = result_ratios(gc.obs, gc.cfg);
    double v = eval_local_objective(w, plan.decision, gc.obs.gains, gc.cfg) +
               eval_remote_objective(w, plan.decision.f_remote, G, H, gc.cfg);
    CHECK(v == doctest::Approx(plan.local_objective + plan.remote_objective));
    return v;
}

} // namespace

// Known gap: block coordinate descent stops at a coordinate-wise stationary
// point here. The local queue constraint binds, so no single block can trade
// uplink rate for a lower extraction factor, and the joint grid is about 2%
// lower. Kept as an expected failure so a change in either direction shows up.
TEST_CASE("single plan against the coarse joint grid" * doctest::should_fail()) {
    auto gc = grid_case();
    auto plan = plan_slot(gc.states, gc.obs, gc.cfg, BcdConfig{});
    REQUIRE(plan.mu == 0.0);
    REQUIRE(plan.nu == 0.0);
    double grid = joint_grid_value(gc);
    double got = plan_value(gc, plan);
    CHECK(got <= grid + 1e-3 * (1 + std::abs(grid)));
}

TEST_CASE("restarted plan reaches the coarse joint grid") {
    auto gc = grid_case();
    auto plan = plan_exh(gc.states, gc.obs, gc.cfg, BcdConfig{}, warm_start({}, gc.cfg), 50, 1, 0);
    double grid = joint_grid_value(gc);
    double got = plan_value(gc, plan);
    CHECK(got <= grid + 1e-3 * (1 + std::abs(grid)));
}

TEST_CASE("no arrivals means no energy") {
    SystemConfig cfg = defaults();
    cfg.arrival_mean_lambda.assign(cfg.num_tds, 0.0);
    finalize(cfg);
    Simulation sim(cfg, Policy::drmsa, 5);
    for (int t = 0; t < 200; ++t) {
        const auto& out = sim.step();
        double e = 0.0;
        for (auto& x : out.energy) e += x.total();
        REQUIRE(e <= 1e-9);
    }
}

TEST_CASE("runs are deterministic") {
    SystemConfig cfg = defaults();
    Simulation a(cfg, Policy::drmsa, 11), b(cfg, Policy::drmsa, 11);
    for (int t = 0; t < 300; ++t) {
        const auto& x = a.step();
        const auto& y = b.step();
        REQUIRE(x.plan.decision.f_local == y.plan.decision.f_local);
        REQUIRE(x.plan.decision.beta == y.plan.decision.beta);
        REQUIRE(x.plan.decision.f_remote == y.plan.decision.f_remote);
    }
    for (std::size_t n = 0; n < cfg.num_tds; ++n) {
        CHECK(a.states()[n].q_local == b.states()[n].q_local);
        CHECK(a.states()[n].x_q == b.states()[n].x_q);
    }
}

TEST_CASE("dropping the energy weight shortens the queues") {
    SystemConfig cfg = defaults();
    RunOptions opts;
    opts.keep_trace = false;
    opts.slots = 3000;
    opts.warmup = 1000;
    auto base = run(cfg, Policy::drmsa, 2, opts);
    cfg.V = 0.0;
    auto greedy = run(cfg, Policy::drmsa, 2, opts);
    CHECK(greedy.summary.q_total_post <= base.summary.q_total_post);
    CHECK(greedy.summary.energy_post >= base.summary.energy_post);
}

TEST_CASE("without the energy weight no energy is wasted") {
    SystemConfig cfg = defaults();
    cfg.V = 0.0;
    finalize(cfg);
    Simulation sim(cfg, Policy::drmsa, 6);
    for (int t = 0; t < 300; ++t) {
        auto obs = sim.observe();
        auto before = sim.states();
        auto plan = sim.plan(obs);
        const auto& d = plan.decision;
        for (std::size_t n = 0; n < cfg.num_tds; ++n) {
            const double h = obs.gains[n];
            // Power without airtime, or beyond what empties a queue, buys nothing.
            if (d.tau_u[n] == 0.0) REQUIRE(d.p_uplink[n] == 0.0);
            if (d.tau_d[n] == 0.0) REQUIRE(d.p_downlink[n] == 0.0);
            REQUIRE(d.p_downlink[n] <=
                    downlink_power_cap(h, before[n].q_down, d.tau_d[n], cfg) * (1 + 1e-9));
            if (before[n].q_remote == 0.0) REQUIRE(d.f_remote[n] == 0.0);
            if (before[n].q_local == 0.0) REQUIRE(d.f_local[n] == 0.0);
        }
        sim.apply(obs, std::move(plan));
    }
}

TEST_CASE("virtual queues are mean-rate stable") {
    SystemConfig cfg = defaults();
    RunOptions opts;
    opts.keep_trace = false;
    auto r = run(cfg, Policy::drmsa, 1, opts);
    CHECK(r.summary.x_q_ratio < r.summary.x_q_half_ratio);
    // With a reachable rate target the rate queue settles too.
    cfg.R_avg = 2.5e6;
    auto s = run(cfg, Policy::drmsa, 1, opts);
    CHECK(s.summary.x_q_ratio < s.summary.x_q_half_ratio);
    CHECK(s.summary.x_r_ratio < s.summary.x_r_half_ratio);
}
