#include "semmec/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace semmec {

SystemConfig ns_config(const SystemConfig& cfg) {
    SystemConfig out = cfg;
    out.a = 0.0;
    out.beta_min = 1.0;
    finalize(out);
    return out;
}

PlanResult plan_ns(const std::vector<TdState>& states, const SlotObservation& obs,
                   const SystemConfig& ns_cfg, const BcdConfig& bcd, const SlotDecision& init,
                   const kernels::Table& kern) {
    SlotDecision start = init;
    std::fill(start.beta.begin(), start.beta.end(), 1.0);
    return plan_slot(states, obs, ns_cfg, bcd, start, PlanOptions{false, true}, kern);
}

PlanResult plan_nl(const std::vector<TdState>& states, const SlotObservation& obs,
                   const SystemConfig& cfg, const BcdConfig& bcd, const SlotDecision& init,
                   const kernels::Table& kern) {
    return plan_slot(states, obs, cfg, bcd, init, PlanOptions{true, false}, kern);
}

namespace {

// Uplink rate minimizing tau*p(r) + tau*kappa_M*(r*G*I)^3 - lambda*tau*r/beta
// on [0, r_max]. The stationarity condition is convex and increasing in r, so
// Newton from the right end converges monotonically.
double myopic_rate(double lambda, double beta, double h, double G, std::size_t n,
                   const SystemConfig& cfg) {
    const double B = cfg.bandwidth_B;
    const double A = cfg.noise_power / h * std::numbers::ln2 / B;
    const double gi = G * cfg.intensity_I[n];
    const double Bc = 3.0 * cfg.kappa_mec * gi * gi * gi;
    const double target = lambda / beta;
    const double r_max = max_uplink_rate(h, n, cfg);
    auto F = [&](double r) { return A * std::exp2(r / B) + Bc * r * r - target; };
    if (F(0.0) >= 0.0) return 0.0;
    if (F(r_max) <= 0.0) return r_max;
    double r = r_max;
    for (int it = 0; it < 200; ++it) {
        double dF = A * std::numbers::ln2 / B * std::exp2(r / B) + 2.0 * Bc * r;
        double next = r - F(r) / dF;
        if (next < 0.0) next = 0.0;
        if (std::abs(next - r) <= 1e-13 * r) {
            r = next;
            break;
        }
        r = next;
    }
    return r;
}

double myopic_freq(double lambda, std::size_t n, const SystemConfig& cfg) {
    const double fmax = cfg.f_local_max[n];
    if (lambda <= 0.0) return 0.0;
    double denom = 3.0 * cfg.kappa_local * cfg.intensity_I[n];
    if (denom <= 0.0) return fmax;
    return std::min(std::sqrt(lambda / denom), fmax);
}

} // namespace

PlanResult plan_myopic(const SlotObservation& obs, const SystemConfig& cfg) {
    const std::size_t N = cfg.num_tds;
    PlanResult res;
    SlotDecision& d = res.decision;
    d = SlotDecision(N);
    const double beta = cfg.beta_min;
    double f_sum = 0.0;
    for (std::size_t n = 0; n < N; ++n) {
        const double h = obs.gains[n];
        const double G = intensity_ratio(obs.min_chi[n], cfg.p_exp);
        const double I = cfg.intensity_I[n];
        d.beta[n] = beta;
        d.tau_u[n] = cfg.slot_tau;
        d.tau_d[n] = 0.0;
        auto rate = [&](double lambda) {
            return myopic_freq(lambda, n, cfg) / I + myopic_rate(lambda, beta, h, G, n, cfg) / beta;
        };
        double lambda = 0.0;
        double best = cfg.f_local_max[n] / I + max_uplink_rate(h, n, cfg) / beta;
        if (best < cfg.R_avg) {
            res.infeasible_target = true;
            d.f_local[n] = cfg.f_local_max[n];
            d.r_uplink[n] = max_uplink_rate(h, n, cfg);
        } else {
            lambda = bisect([&](double l) { return cfg.R_avg - rate(l); }, BisectionSpec{});
            d.f_local[n] = myopic_freq(lambda, n, cfg);
            d.r_uplink[n] = myopic_rate(lambda, beta, h, G, n, cfg);
        }
        d.p_uplink[n] = uplink_power(h, d.r_uplink[n], cfg);
        // Remote side drains what this slot uploads.
        d.f_remote[n] = d.r_uplink[n] * G * I;
        f_sum += d.f_remote[n];
    }
    if (f_sum > cfg.F_mec) {
        double scale = cfg.F_mec / f_sum;
        for (auto& f : d.f_remote) f *= scale;
    }
    return res;
}

PlanResult plan_exh(const std::vector<TdState>& states, const SlotObservation& obs,
                    const SystemConfig& cfg, const BcdConfig& bcd, const SlotDecision& warm,
                    int restarts, std::uint64_t seed, std::uint64_t slot,
                    const kernels::Table& kern) {
    const std::size_t N = cfg.num_tds;
    auto w = compute_weights(states, obs, cfg);
    PlanResult best;
    for (int i = 0; i < std::max(restarts, 1); ++i) {
        SlotDecision init = warm;
        if (i > 0) {
            Rng rng = make_stream(seed, "exh", slot, static_cast<std::uint64_t>(i));
            init = SlotDecision(N);
            for (std::size_t n = 0; n < N; ++n) {
                init.beta[n] = cfg.beta_min + (1.0 - cfg.beta_min) * uniform01(rng);
                double u = uniform01(rng), v = uniform01(rng);
                if (u + v > 1.0) {
                    u = 1.0 - u;
                    v = 1.0 - v;
                }
                init.tau_u[n] = u * cfg.slot_tau;
                init.tau_d[n] = v * cfg.slot_tau;
            }
        }
        auto r = plan_local(w, states, obs, cfg, bcd, init, {}, kern);
        if (i == 0 || r.local_objective < best.local_objective) best = std::move(r);
    }
    // The remote problem does not depend on the local decisions, so one
    // solve serves every restart.
    std::vector<double> q_remote(N);
    for (std::size_t n = 0; n < N; ++n) q_remote[n] = states[n].q_remote;
    auto G = intensity_ratios(obs, cfg);
    auto H = result_ratios(obs, cfg);
    auto rr = solve_remote_allocation(w, q_remote, G, H, cfg, kern);
    best.decision.f_remote = rr.f;
    best.nu = rr.nu;
    best.remote_objective = eval_remote_objective(w, rr.f, G, H, cfg);
    return best;
}

} // namespace semmec
