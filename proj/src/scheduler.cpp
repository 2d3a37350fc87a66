#include "semmec/scheduler.hpp"

#include "semmec/baselines.hpp"
#include "semmec/errors.hpp"

#include <algorithm>
#include <cmath>

namespace semmec {

TdWeights compute_weights_td(const TdState& s, double h, std::size_t n, const SystemConfig& cfg) {
    TdWeights w;
    w.c_max = cfg.a * cfg.slot_tau * max_uplink_rate(h, n, cfg) / std::pow(cfg.beta_min, cfg.k);
    w.w1 = 2.0 * s.q_local + s.x_q;
    w.w2 = s.x_r + 2.0 * s.q_local + 2.0 * w.c_max + s.x_q;
    w.w3 = 4.0 * s.q_remote + s.x_q;
    w.w4 = 4.0 * s.q_down + s.x_q;
    return w;
}

SlotWeights compute_weights(const std::vector<TdState>& states, const SlotObservation& obs,
                            const SystemConfig& cfg) {
    SlotWeights w(states.size());
    for (std::size_t n = 0; n < states.size(); ++n)
        w[n] = compute_weights_td(states[n], obs.gains[n], n, cfg);
    return w;
}

SlotDecision warm_start(const std::vector<double>& beta, const SystemConfig& cfg) {
    SlotDecision d(cfg.num_tds);
    for (std::size_t n = 0; n < cfg.num_tds; ++n) {
        d.beta[n] = std::clamp(n < beta.size() ? beta[n] : 1.0, cfg.beta_min, 1.0);
        d.tau_u[n] = 0.5 * cfg.slot_tau;
        d.tau_d[n] = 0.5 * cfg.slot_tau;
    }
    return d;
}

PlanResult plan_local(const SlotWeights& w, const std::vector<TdState>& states,
                      const SlotObservation& obs, const SystemConfig& cfg, const BcdConfig& bcd,
                      const SlotDecision& init, const PlanOptions& opts,
                      const kernels::Table& kern) {
    const std::size_t N = states.size();
    const auto& h = obs.gains;
    std::vector<double> q_down(N);
    for (std::size_t n = 0; n < N; ++n) q_down[n] = states[n].q_down;

    PlanResult res;
    res.decision = init;
    res.rho.assign(N, 0.0);
    res.xi.assign(N, 0.0);
    SlotDecision& d = res.decision;
    std::fill(d.f_remote.begin(), d.f_remote.end(), 0.0);
    if (!opts.local_enabled) std::fill(d.f_local.begin(), d.f_local.end(), 0.0);

    double obj = eval_local_objective(w, d, h, cfg);
    res.objective_trace.push_back(obj);
    for (int round = 1; round <= bcd.max_rounds; ++round) {
        for (std::size_t n = 0; n < N; ++n) {
            auto lu = solve_local_and_uplink(w[n], d.beta[n], d.tau_u[n], h[n], states[n].q_local,
                                             n, cfg, opts.local_enabled);
            d.f_local[n] = lu.f_local;
            d.r_uplink[n] = lu.r_uplink;
            d.p_uplink[n] = uplink_power(h[n], lu.r_uplink, cfg);
            res.rho[n] = lu.rho;
        }
        auto dl = solve_downlink_power(w, d.tau_d, h, q_down, cfg, kern);
        d.p_downlink = dl.p;
        res.mu = dl.mu;

        if (opts.optimize_beta) {
            for (std::size_t n = 0; n < N; ++n) {
                auto ex = solve_extraction_factor(w[n], d.f_local[n], d.r_uplink[n], d.tau_u[n],
                                                  states[n].q_local, n, cfg, d.beta[n]);
                d.beta[n] = ex.beta;
                res.xi[n] = ex.xi;
                res.extraction_flags += ex.flagged ? 1 : 0;
            }
        }
        for (std::size_t n = 0; n < N; ++n) {
            auto ts = solve_time_division(w[n], d.f_local[n], d.r_uplink[n], d.p_uplink[n],
                                          d.p_downlink[n], d.beta[n], h[n], states[n].q_local,
                                          q_down[n], n, cfg);
            d.tau_u[n] = ts.tau_u;
            d.tau_d[n] = ts.tau_d;
            res.time_clamps += ts.clamped ? 1 : 0;
        }

        double next = eval_local_objective(w, d, h, cfg);
        res.objective_trace.push_back(next);
        res.rounds = round;
        if (next > obj + 1e-9 * (1.0 + std::abs(obj)))
            throw ConsistencyError("block coordinate descent increased the objective from " +
                                   std::to_string(obj) + " to " + std::to_string(next) +
                                   " in round " + std::to_string(round));
        bool done = std::abs(next - obj) <= bcd.objective_rel_tol * (1.0 + std::abs(next));
        obj = next;
        if (done) break;
    }
    // Rates and powers without airtime have no effect; drop them.
    for (std::size_t n = 0; n < N; ++n) {
        if (d.tau_u[n] <= 0.0) d.r_uplink[n] = d.p_uplink[n] = 0.0;
        if (d.tau_d[n] <= 0.0) d.p_downlink[n] = 0.0;
    }
    res.local_objective = obj;
    return res;
}

std::vector<double> intensity_ratios(const SlotObservation& obs, const SystemConfig& cfg) {
    std::vector<double> G(obs.min_chi.size());
    for (std::size_t n = 0; n < G.size(); ++n) G[n] = intensity_ratio(obs.min_chi[n], cfg.p_exp);
    return G;
}

std::vector<double> result_ratios(const SlotObservation& obs, const SystemConfig& cfg) {
    std::vector<double> H(obs.min_chi.size());
    for (std::size_t n = 0; n < H.size(); ++n) H[n] = result_ratio(obs.min_chi[n], cfg.U);
    return H;
}

namespace {

void attach_remote(PlanResult& res, const SlotWeights& w, const std::vector<TdState>& states,
                   const SlotObservation& obs, const SystemConfig& cfg,
                   const kernels::Table& kern) {
    std::vector<double> q_remote(states.size());
    for (std::size_t n = 0; n < states.size(); ++n) q_remote[n] = states[n].q_remote;
    auto G = intensity_ratios(obs, cfg);
    auto H = result_ratios(obs, cfg);
    auto rr = solve_remote_allocation(w, q_remote, G, H, cfg, kern);
    res.decision.f_remote = rr.f;
    res.nu = rr.nu;
    res.remote_objective = eval_remote_objective(w, rr.f, G, H, cfg);
}

} // namespace

PlanResult plan_slot(const std::vector<TdState>& states, const SlotObservation& obs,
                     const SystemConfig& cfg, const BcdConfig& bcd,
                     const std::optional<SlotDecision>& init, const PlanOptions& opts,
                     const kernels::Table& kern) {
    auto w = compute_weights(states, obs, cfg);
    SlotDecision start = init ? *init : warm_start({}, cfg);
    auto res = plan_local(w, states, obs, cfg, bcd, start, opts, kern);
    attach_remote(res, w, states, obs, cfg, kern);
    return res;
}

Policy parse_policy(std::string_view name) {
    if (name == "drmsa") return Policy::drmsa;
    if (name == "ns") return Policy::ns;
    if (name == "nl") return Policy::nl;
    if (name == "myopic") return Policy::myopic;
    if (name == "exh") return Policy::exh;
    throw ConfigError("policy '" + std::string(name) + "': expected drmsa|ns|nl|myopic|exh");
}

const char* policy_name(Policy p) {
    switch (p) {
    case Policy::drmsa: return "drmsa";
    case Policy::ns: return "ns";
    case Policy::nl: return "nl";
    case Policy::myopic: return "myopic";
    case Policy::exh: return "exh";
    }
    return "?";
}

SlotFlows decision_flows(const SlotDecision& d, std::size_t n, const SlotObservation& obs,
                         const SystemConfig& cfg) {
    SlotFlows f;
    const double tau = cfg.slot_tau;
    const double I = cfg.intensity_I[n];
    const double G = intensity_ratio(obs.min_chi[n], cfg.p_exp);
    f.arrivals = obs.arrivals[n];
    f.cost = extraction_cost(d.tau_u[n], d.r_uplink[n], d.beta[n], cfg);
    f.local_bits = tau * local_rate(d.f_local[n], I);
    f.uplink_sem_bits = d.tau_u[n] * d.r_uplink[n];
    f.beta = d.beta[n];
    f.processed_sem_bits = tau * remote_rate(d.f_remote[n], G, I);
    f.downlink_bits = d.tau_d[n] * downlink_rate(obs.gains[n], d.p_downlink[n], cfg);
    f.H = result_ratio(obs.min_chi[n], cfg.U);
    return f;
}

Simulation::Simulation(const SystemConfig& cfg, Policy policy, std::uint64_t seed,
                       const SimOptions& opts)
    : cfg_(cfg), policy_(policy), seed_(seed), opts_(opts) {
    finalize(cfg_);
    plan_cfg_ = policy == Policy::ns ? ns_config(cfg_) : cfg_;
    kern_ = opts.kern ? opts.kern : &kernels::active();
    const std::size_t N = cfg_.num_tds;
    states_.assign(N, TdState{});
    for (std::size_t n = 0; n < N; ++n) {
        arrival_rng_.push_back(make_stream(seed, "arrival", n));
        channel_rng_.push_back(make_stream(seed, "channel", n));
        mean_gain_.push_back(path_loss_gain(cfg_.distances[n], cfg_));
    }
    prev_beta_.assign(N, 1.0);
}

SlotObservation Simulation::observe() {
    const std::size_t N = cfg_.num_tds;
    SlotObservation obs;
    obs.gains.resize(N);
    obs.arrivals.resize(N);
    obs.min_chi.resize(N);
    for (std::size_t n = 0; n < N; ++n) {
        obs.gains[n] = cfg_.channel_mode == ChannelMode::stochastic
                           ? sample_channel(mean_gain_[n], cfg_.rician_gamma, channel_rng_[n])
                           : mean_gain_[n];
        obs.arrivals[n] = cfg_.arrival_mode == ArrivalMode::stochastic
                              ? sample_exponential(cfg_.arrival_mean_lambda[n], arrival_rng_[n])
                              : cfg_.arrival_mean_lambda[n];
        obs.min_chi[n] = min_chi(states_[n]);
    }
    return obs;
}

PlanResult Simulation::plan(const SlotObservation& obs) {
    switch (policy_) {
    case Policy::drmsa:
        return plan_slot(states_, obs, plan_cfg_, opts_.bcd, warm_start(prev_beta_, plan_cfg_), {},
                         *kern_);
    case Policy::ns:
        return plan_ns(states_, obs, plan_cfg_, opts_.bcd, warm_start(prev_beta_, plan_cfg_),
                       *kern_);
    case Policy::nl:
        return plan_nl(states_, obs, plan_cfg_, opts_.bcd, warm_start(prev_beta_, plan_cfg_),
                       *kern_);
    case Policy::myopic: return plan_myopic(obs, plan_cfg_);
    case Policy::exh:
        return plan_exh(states_, obs, plan_cfg_, opts_.bcd, warm_start(prev_beta_, plan_cfg_),
                        opts_.exh_restarts, seed_, slot_, *kern_);
    }
    throw ConfigError("unknown policy");
}

const SlotOutcome& Simulation::apply(const SlotObservation& obs, PlanResult plan) {
    const std::size_t N = cfg_.num_tds;
    if (auto why = check_decision(plan.decision, obs.gains, cfg_); !why.empty())
        throw ConsistencyError("slot " + std::to_string(slot_) + ": infeasible decision: " + why);
    last_.slot = slot_;
    last_.energy.resize(N);
    last_.proc_bits.resize(N);
    for (std::size_t n = 0; n < N; ++n) {
        SlotFlows f = decision_flows(plan.decision, n, obs, plan_cfg_);
        last_.energy[n] = td_energy(plan.decision, n, cfg_);
        last_.proc_bits[n] = processed_bits(f);
        try {
            apply_transitions(states_[n], f, cfg_);
        } catch (const ConsistencyError& e) {
            throw ConsistencyError("slot " + std::to_string(slot_) + ", td " + std::to_string(n) +
                                   ": " + e.what());
        }
    }
    prev_beta_ = plan.decision.beta;
    last_.obs = obs;
    last_.plan = std::move(plan);
    ++slot_;
    return last_;
}

const SlotOutcome& Simulation::step() {
    SlotObservation obs = observe();
    PlanResult p = plan(obs);
    return apply(obs, std::move(p));
}

} // namespace semmec
