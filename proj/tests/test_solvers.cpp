#include "semmec/errors.hpp"
#include "semmec/oracle.hpp"
#include "semmec/rng.hpp"
#include "semmec/solvers.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>

using namespace semmec;

namespace {

SystemConfig defaults() {
    SystemConfig cfg = table_one_defaults();
    finalize(cfg);
    return cfg;
}

TdWeights weights(double w1, double w2, double w3, double w4) { return {w1, w2, w3, w4, 0.0}; }

} // namespace

TEST_CASE("bisection") {
    BisectionSpec inc;
    inc.lower = 0.0;
    inc.upper = 10.0;
    inc.tolerance = 1e-9;
    inc.direction = Monotone::increasing;
    CHECK(bisect([](double x) { return x - 2.0; }, inc) == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(bisect([](double x) { return x * x * x - 8.0; }, inc) ==
          doctest::Approx(2.0).epsilon(1e-9));
    // Already feasible at the lower end.
    CHECK(bisect([](double x) { return -1.0 - x; }, BisectionSpec{}) == 0.0);
    // Decreasing residual: smallest multiplier with residual <= 0.
    double m = bisect([](double x) { return 5e7 - x; }, BisectionSpec{});
    CHECK(m == doctest::Approx(5e7).epsilon(1e-13));
    CHECK(5e7 - m <= 0.0);
    CHECK_THROWS_AS(bisect([](double) { return 1.0; }, BisectionSpec{}), ConvergenceError);
}

TEST_CASE("downlink power") {
    SystemConfig cfg = defaults();
    const std::size_t N = 3;
    SlotWeights w(N, weights(0, 1, 0, 0));
    std::vector<double> tau_d(N, 0.5), h{3e-11, 1e-11, 5e-12}, q_down(N, 1e5);

    SUBCASE("no downlink pressure") {
        auto r = solve_downlink_power(w, tau_d, h, q_down, cfg);
        for (double p : r.p) CHECK(p == 0.0);
    }
    SUBCASE("empty queues cap the power at zero") {
        for (auto& x : w) x.w4 = 1e9;
        auto r = solve_downlink_power(w, tau_d, h, std::vector<double>(N, 0.0), cfg);
        for (double p : r.p) CHECK(p == 0.0);
    }
    SUBCASE("devices without downlink time are excluded") {
        for (auto& x : w) x.w4 = 1e9;
        tau_d[1] = 0.0;
        auto r = solve_downlink_power(w, tau_d, h, q_down, cfg);
        CHECK(r.p[1] == 0.0);
        CHECK(r.p[0] > 0.0);
    }
    SUBCASE("power grows with the weight") {
        cfg.P_mec = 100.0;
        std::vector<double> q_big(N, 1e9);
        double prev = 0.0;
        for (double w4 = 1e6; w4 <= 1e10; w4 *= 3.0) {
            for (auto& x : w) x.w4 = w4;
            auto r = solve_downlink_power(w, tau_d, h, q_big, cfg);
            CHECK(r.p[2] >= prev);
            prev = r.p[2];
        }
    }
    SUBCASE("tight budget binds and matches the oracle") {
        cfg.P_mec = 0.01;
        for (auto& x : w) x.w4 = 1e10;
        std::vector<double> q_big(N, 1e8);
        auto r = solve_downlink_power(w, tau_d, h, q_big, cfg);
        double sum = std::accumulate(r.p.begin(), r.p.end(), 0.0);
        CHECK(sum <= cfg.P_mec * (1 + 1e-9));
        CHECK(sum == doctest::Approx(cfg.P_mec).epsilon(1e-6));
        CHECK(r.mu > 0.0);
        oracle::DownlinkInstance in{{1e10, 1e10, 1e10}, tau_d, h, q_big};
        double ref = oracle::downlink_oracle(in, cfg);
        double val = oracle::downlink_objective(in, r.p, cfg);
        CHECK(std::abs(val - ref) / (1 + std::abs(ref)) <= 1e-4);
        CHECK(oracle::downlink_kkt(in, r.p, r.mu, cfg).worst() <= 1e-6);
    }
    CHECK(downlink_power_cap(2e-11, 0.0, 0.5, cfg) == 0.0);
}

TEST_CASE("local computing and uplink") {
    SystemConfig cfg = defaults();
    const double h = 1.5e-11;
    SUBCASE("multiplier above the processing weight stops the CPU") {
        TdWeights w = weights(1e6, 5e6, 0, 0);
        CHECK(local_freq_at(w, 6e6, 0, cfg) == 0.0);
        CHECK(local_freq_at(w, 4e6, 0, cfg) > 0.0);
    }
    SUBCASE("non-negative rate coefficient stops the uplink") {
        // a*W1/beta^k dominates W2/beta.
        TdWeights w = weights(1e12, 1e6, 0, 0);
        CHECK(uplink_rate_at(w, 0.0, 0.3, 0.5, h, 0, cfg) == 0.0);
        auto r = solve_local_and_uplink(w, 0.3, 0.5, h, 1e9, 0, cfg);
        CHECK(r.r_uplink == 0.0);
    }
    SUBCASE("frequency grows with the processing weight") {
        double prev = 0.0;
        for (double w2 = 1e5; w2 < 1e10; w2 *= 2.0) {
            double f = local_freq_at(weights(0, w2, 0, 0), 0.0, 0, cfg);
            CHECK(f >= prev);
            prev = f;
        }
    }
    SUBCASE("no uplink time means no uplink rate") {
        auto r = solve_local_and_uplink(weights(0, 1e8, 0, 0), 0.5, 0.0, h, 1e7, 0, cfg);
        CHECK(r.r_uplink == 0.0);
    }
    SUBCASE("disabled local computing") {
        auto r = solve_local_and_uplink(weights(0, 1e8, 0, 0), 0.5, 0.5, h, 1e7, 0, cfg, false);
        CHECK(r.f_local == 0.0);
    }
    SUBCASE("interior optimum zeroes the derivative") {
        TdWeights w = weights(1e5, 5e6, 1e5, 0);
        oracle::LocalInstance in{w.w1, w.w2, w.w3, 0.6, 0.5, h, 1e9, 0, true};
        auto r = solve_local_and_uplink(w, in.beta, in.tau_u, h, in.q_local, 0, cfg);
        REQUIRE(r.rho == 0.0);
        REQUIRE(r.f_local > 0.0);
        REQUIRE(r.f_local < cfg.f_local_max[0]);
        REQUIRE(r.r_uplink > 0.0);
        REQUIRE(r.r_uplink < max_uplink_rate(h, 0, cfg));
        CHECK(oracle::local_kkt(in, r.f_local, r.r_uplink, r.rho, cfg).stationarity <= 1e-10);
        double before = oracle::local_kkt(in, r.f_local, r.r_uplink, r.rho, cfg).stationarity;
        double after = oracle::local_kkt(in, r.f_local * 1.01, r.r_uplink, r.rho, cfg).stationarity;
        CHECK(after > before);
    }
    SUBCASE("binding workload constraint") {
        TdWeights w = weights(1e6, 1e9, 1e6, 0);
        const double q = 2e6;
        auto r = solve_local_and_uplink(w, 0.5, 0.5, h, q, 0, cfg);
        CHECK(r.rho > 0.0);
        oracle::LocalInstance in{w.w1, w.w2, w.w3, 0.5, 0.5, h, q, 0, true};
        CHECK(std::abs(oracle::local_constraint(in, r.f_local, r.r_uplink, cfg)) <= 1e-6 * q);
        auto ref = oracle::local_oracle(in, cfg);
        double val = oracle::local_objective(in, r.f_local, r.r_uplink, cfg);
        CHECK(std::abs(val - ref.value) / (1 + std::abs(ref.value)) <= 1e-4);
    }
}

TEST_CASE("extraction factor") {
    SystemConfig cfg = defaults();
    TdWeights w = weights(1e7, 5e7, 0, 0);
    SUBCASE("nothing sent keeps the incumbent") {
        auto r = solve_extraction_factor(w, 1e8, 0.0, 0.5, 1e7, 0, cfg, 0.7);
        CHECK(r.beta == 0.7);
        r = solve_extraction_factor(w, 1e8, 1e6, 0.0, 1e7, 0, cfg, 0.45);
        CHECK(r.beta == 0.45);
    }
    SUBCASE("singleton range") {
        SystemConfig c = cfg;
        c.beta_min = 1.0;
        finalize(c);
        CHECK(solve_extraction_factor(w, 1e8, 1e6, 0.5, 1e7, 0, c, 1.0).beta == 1.0);
    }
    SUBCASE("threshold structure returns exactly one") {
        // W2 < k*a*W1: the unconstrained minimizer in 1/beta lies below 1.
        TdWeights heavy = weights(1e12, 1e6, 0, 0);
        REQUIRE(heavy.w2 < cfg.k * cfg.a * heavy.w1);
        auto r = solve_extraction_factor(heavy, 1e8, 2e6, 0.5, 1e8, 0, cfg, 0.4);
        CHECK(r.beta == 1.0);
    }
    SUBCASE("result is feasible for the original constraint and beats the grid") {
        const double f = 2e8, rate = 4e6, tau_u = 0.5;
        const double q = cfg.slot_tau * f / cfg.intensity_I[0] + tau_u * rate * 1.5;
        auto r = solve_extraction_factor(w, f, rate, tau_u, q, 0, cfg, 0.9);
        oracle::ExtractionInstance in{w.w1, w.w2, f, rate, tau_u, q, 0};
        CHECK(oracle::extraction_constraint(in, r.beta, cfg) <= 1e-9 * q);
        auto ref = oracle::extraction_oracle(in, cfg);
        double val = oracle::extraction_objective(in, r.beta, cfg);
        CHECK(val <= ref.value + 1e-4 * (1 + std::abs(ref.value)));
        CHECK(r.beta >= cfg.beta_min);
        CHECK(r.beta <= 1.0);
    }
}

TEST_CASE("time division case rows") {
    SystemConfig cfg = defaults();
    const double h = 2e-11;
    SUBCASE("both coefficients non-negative: no transmission") {
        auto t = solve_time_division(weights(0, 1e6, 0, 0), 0.0, 0.0, 0.0, 0.5, 0.5, h, 1e6,
                                     1e5, 0, cfg);
        CHECK(t.tau_u == 0.0);
        CHECK(t.tau_d == 0.0);
    }
    SUBCASE("only the downlink pays off") {
        const double pd = 0.3, qd = 2e5;
        auto t = solve_time_division(weights(0, 1e6, 0, 1e12), 0.0, 0.0, 0.0, pd, 0.5, h, 1e6,
                                     qd, 0, cfg);
        CHECK(t.tau_u == 0.0);
        CHECK(t.tau_d == doctest::Approx(std::min(cfg.slot_tau, qd / downlink_rate(h, pd, cfg))));
    }
    SUBCASE("split never exceeds the slot") {
        Rng rng = make_stream(2, "test-time");
        for (int i = 0; i < 500; ++i) {
            TdWeights w = weights(1e6 * uniform01(rng), 1e8 * uniform01(rng), 1e7 * uniform01(rng),
                                  1e9 * uniform01(rng));
            double r = 1e7 * uniform01(rng);
            auto t = solve_time_division(w, 1e8 * uniform01(rng), r, uplink_power(h, r, cfg),
                                         uniform01(rng), 0.3 + 0.7 * uniform01(rng), h,
                                         1e7 + 1e7 * uniform01(rng), 1e6 * uniform01(rng), 0, cfg);
            REQUIRE(t.tau_u >= 0.0);
            REQUIRE(t.tau_d >= 0.0);
            REQUIRE(t.tau_u + t.tau_d <= cfg.slot_tau * (1 + 1e-12));
        }
    }
}

TEST_CASE("remote allocation") {
    SystemConfig cfg = defaults();
    const std::size_t N = 4;
    std::vector<double> q_remote(N, 5e6), G(N, 2.0), H(N, 0.02);
    SUBCASE("positive marginal cost leaves the server idle") {
        SlotWeights w(N, weights(0, 1, 0, 1e9));
        auto r = solve_remote_allocation(w, q_remote, G, H, cfg);
        for (double f : r.f) CHECK(f == 0.0);
    }
    SUBCASE("empty queues get no cycles") {
        SlotWeights w(N, weights(0, 1, 1e9, 0));
        w[0].w3 = 1e12;
        auto r = solve_remote_allocation(w, std::vector<double>(N, 0.0), G, H, cfg);
        for (double f : r.f) CHECK(f == 0.0);
    }
    SUBCASE("a smaller budget raises nu and lowers every frequency") {
        SlotWeights w(N, weights(0, 1, 1e12, 0));
        for (std::size_t n = 0; n < N; ++n) w[n].w3 = 1e12 * (n + 1);
        std::vector<double> big_q(N, 1e10);
        std::vector<double> prev;
        double prev_nu = -1.0;
        for (double F : {1e11, 3e10, 1e10, 3e9, 1e9}) {
            cfg.F_mec = F;
            auto r = solve_remote_allocation(w, big_q, G, H, cfg);
            double sum = std::accumulate(r.f.begin(), r.f.end(), 0.0);
            CHECK(sum <= F * (1 + 1e-9));
            CHECK(r.nu >= prev_nu);
            if (!prev.empty())
                for (std::size_t n = 0; n < N; ++n) CHECK(r.f[n] <= prev[n]);
            prev = r.f;
            prev_nu = r.nu;
        }
    }
}

TEST_CASE("objective evaluators") {
    SystemConfig cfg = defaults();
    const std::size_t N = cfg.num_tds;
    SlotWeights w(N, weights(1e6, 2e7, 3e6, 4e6));
    std::vector<double> h(N, 2e-11);
    SlotDecision zero(N);
    CHECK(eval_local_objective(w, zero, h, cfg) == 0.0);
    CHECK(eval_remote_objective(w, zero.f_remote, std::vector<double>(N, 1.0),
                                std::vector<double>(N, 0.01), cfg) == 0.0);

    Rng rng = make_stream(4, "test-objective");
    SlotDecision d(N);
    for (std::size_t n = 0; n < N; ++n) {
        d.f_local[n] = 1e9 * uniform01(rng);
        d.r_uplink[n] = 1e7 * uniform01(rng);
        d.p_uplink[n] = uplink_power(h[n], d.r_uplink[n], cfg);
        d.p_downlink[n] = 0.1 * uniform01(rng);
        d.beta[n] = 0.3 + 0.7 * uniform01(rng);
        d.tau_u[n] = 0.5 * uniform01(rng);
        d.tau_d[n] = 0.5 * uniform01(rng);
        d.f_remote[n] = 3e9 * uniform01(rng);
    }
    // Term-by-term restatement.
    double expect = 0.0, energy = 0.0;
    for (std::size_t n = 0; n < N; ++n) {
        double sent = d.tau_u[n] * d.r_uplink[n];
        double cost = cfg.a * sent / std::pow(d.beta[n], cfg.k);
        double processed = cfg.slot_tau * d.f_local[n] / cfg.intensity_I[n] + sent / d.beta[n];
        double down = d.tau_d[n] * cfg.bandwidth_B *
                      std::log2(1 + h[n] * d.p_downlink[n] / cfg.noise_power);
        double e = cfg.slot_tau * cfg.kappa_local * std::pow(d.f_local[n], 3) +
                   d.tau_u[n] * d.p_uplink[n] + d.tau_d[n] * d.p_downlink[n];
        expect += w[n].w1 * cost - w[n].w2 * processed + w[n].w3 * sent - w[n].w4 * down +
                  cfg.V * e;
        energy += e;
    }
    double got = eval_local_objective(w, d, h, cfg);
    CHECK(got == doctest::Approx(expect).epsilon(1e-12));
    SystemConfig c2 = cfg;
    c2.V = 2 * cfg.V;
    CHECK(eval_local_objective(w, d, h, c2) - got == doctest::Approx(cfg.V * energy).epsilon(1e-9));

    std::vector<double> G(N, 1.5), H(N, 0.02);
    double rexp = 0.0, renergy = 0.0;
    for (std::size_t n = 0; n < N; ++n) {
        double bits = cfg.slot_tau * d.f_remote[n] / (G[n] * cfg.intensity_I[n]);
        double e = cfg.slot_tau * cfg.kappa_mec * std::pow(d.f_remote[n], 3);
        rexp += -w[n].w3 * bits + w[n].w4 * H[n] * bits + cfg.V * e;
        renergy += e;
    }
    double rgot = eval_remote_objective(w, d.f_remote, G, H, cfg);
    CHECK(rgot == doctest::Approx(rexp).epsilon(1e-12));
    CHECK(eval_remote_objective(w, d.f_remote, G, H, c2) - rgot ==
          doctest::Approx(cfg.V * renergy).epsilon(1e-9));
}
