#include "semmec/verify.hpp"

#include "semmec/errors.hpp"
#include "semmec/model.hpp"
#include "semmec/scheduler.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <stdexcept>

namespace semmec::verify {

namespace {

double uni(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

double log_uni(Rng& rng, double lo, double hi) {
    return std::exp(uni(rng, std::log(lo), std::log(hi)));
}

// Mostly continuous draws with a share of exact zeros, which exercise the
// degenerate branches of every solver.
double maybe_zero(Rng& rng, double p_zero, double value) {
    return uniform01(rng) < p_zero ? 0.0 : value;
}

std::size_t random_count(Rng& rng) { return 2 + static_cast<std::size_t>(uniform01(rng) * 4.0); }

struct Outcome {
    double gap = 0.0;
    double kkt = 0.0;
    std::string detail;
};

std::string describe(double solver, double oracle, const oracle::KktResidual& k) {
    char buf[192];
    std::snprintf(buf, sizeof buf,
                  "solver %.12g vs oracle %.12g, kkt stat %.2e feas %.2e comp %.2e", solver,
                  oracle, k.stationarity, k.feasibility, k.complementarity);
    return buf;
}

Outcome check_local(Rng& rng, const kernels::Table&) {
    SystemConfig cfg = random_config(rng);
    std::size_t td = static_cast<std::size_t>(uniform01(rng) * cfg.num_tds);
    double h = random_gain(cfg, td, rng);
    TdWeights w = random_weights(cfg, h, td, rng);
    oracle::LocalInstance in{w.w1, w.w2, w.w3, uni(rng, cfg.beta_min, 1.0),
                             maybe_zero(rng, 0.05, uni(rng, 0.0, cfg.slot_tau)), h,
                             uniform01(rng) < 0.5 ? uni(rng, 0.0, 2e6) : uni(rng, 0.0, 40e6), td,
                             uniform01(rng) > 0.05};
    auto sol = solve_local_and_uplink(w, in.beta, in.tau_u, h, in.q_local, td, cfg,
                                      in.local_enabled);
    double value = oracle::local_objective(in, sol.f_local, sol.r_uplink, cfg);
    auto ref = oracle::local_oracle(in, cfg);
    auto kkt = oracle::local_kkt(in, sol.f_local, sol.r_uplink, sol.rho, cfg);
    return {objective_gap(value, ref.value), kkt.worst(), describe(value, ref.value, kkt)};
}

Outcome check_downlink(Rng& rng, const kernels::Table& kern) {
    SystemConfig cfg = random_config(rng);
    std::size_t n = std::min(random_count(rng), cfg.num_tds);
    resize_devices(cfg, n);
    finalize(cfg);
    oracle::DownlinkInstance in;
    SlotWeights w(n);
    for (std::size_t i = 0; i < n; ++i) {
        double h = random_gain(cfg, i, rng);
        w[i] = random_weights(cfg, h, i, rng);
        in.w4.push_back(w[i].w4);
        in.h.push_back(h);
        in.tau_d.push_back(maybe_zero(rng, 0.1, uni(rng, 0.0, cfg.slot_tau)));
        in.q_down.push_back(maybe_zero(rng, 0.05, log_uni(rng, 1e3, 2e7)));
    }
    auto sol = solve_downlink_power(w, in.tau_d, in.h, in.q_down, cfg, kern);
    double value = oracle::downlink_objective(in, sol.p, cfg);
    double ref = oracle::downlink_oracle(in, cfg);
    auto kkt = oracle::downlink_kkt(in, sol.p, sol.mu, cfg);
    return {objective_gap(value, ref), kkt.worst(), describe(value, ref, kkt)};
}

Outcome check_extraction(Rng& rng, const kernels::Table&) {
    SystemConfig cfg = random_config(rng);
    std::size_t td = static_cast<std::size_t>(uniform01(rng) * cfg.num_tds);
    double h = random_gain(cfg, td, rng);
    TdWeights w = random_weights(cfg, h, td, rng);
    double beta0 = uni(rng, cfg.beta_min, 1.0);
    double tau_u = uni(rng, 0.05, 1.0) * cfg.slot_tau;
    double r = maybe_zero(rng, 0.05, uni(rng, 0.0, max_uplink_rate(h, td, cfg)));
    double f = uni(rng, 0.0, cfg.f_local_max[td]);
    // Queue large enough that beta0 itself is feasible.
    double need = cfg.slot_tau * f / cfg.intensity_I[td] +
                  tau_u * r * (1.0 / beta0 - cfg.a / std::pow(beta0, cfg.k));
    double q_local = need + maybe_zero(rng, 0.2, log_uni(rng, 1.0, 1e7));
    oracle::ExtractionInstance in{w.w1, w.w2, f, r, tau_u, q_local, td};
    auto sol = solve_extraction_factor(w, f, r, tau_u, q_local, td, cfg, beta0);
    double value = oracle::extraction_objective(in, sol.beta, cfg);
    auto ref = oracle::extraction_oracle(in, cfg);
    auto kkt = oracle::extraction_kkt(in, sol.beta, sol.xi, cfg);
    return {objective_gap(value, ref.value), kkt.worst(), describe(value, ref.value, kkt)};
}

Outcome check_time(Rng& rng, const kernels::Table&) {
    SystemConfig cfg = random_config(rng);
    std::size_t td = static_cast<std::size_t>(uniform01(rng) * cfg.num_tds);
    double h = random_gain(cfg, td, rng);
    TdWeights w = random_weights(cfg, h, td, rng);
    double r = maybe_zero(rng, 0.05, uni(rng, 0.0, max_uplink_rate(h, td, cfg)));
    double f = uni(rng, 0.0, cfg.f_local_max[td]);
    double beta = uni(rng, cfg.beta_min, 1.0);
    double p_d = maybe_zero(rng, 0.05, uni(rng, 0.0, cfg.P_mec));
    double q_local = cfg.slot_tau * f / cfg.intensity_I[td] + maybe_zero(rng, 0.05, log_uni(rng, 1.0, 4e7));
    double q_down = maybe_zero(rng, 0.05, log_uni(rng, 1.0, 2e7));
    oracle::TimeInstance in{w.w1, w.w2, w.w3, w.w4, f, r, uplink_power(h, r, cfg), p_d, beta,
                            h, q_local, q_down, td};
    auto sol = solve_time_division(w, f, r, in.p_uplink, p_d, beta, h, q_local, q_down, td, cfg);
    double value = oracle::time_objective(in, sol.tau_u, sol.tau_d, cfg);
    auto ref = oracle::time_oracle(in, cfg);
    // A linear program has no interior stationarity; feasibility is the check.
    double viol = 0.0;
    for (const auto& hp : oracle::time_polytope(in, cfg)) {
        double lhs = hp.a * sol.tau_u + hp.b * sol.tau_d;
        double scale = std::abs(hp.a * sol.tau_u) + std::abs(hp.b * sol.tau_d) + std::abs(hp.c) + 1.0;
        viol = std::max(viol, std::max(0.0, lhs - hp.c) / scale);
    }
    oracle::KktResidual kkt;
    kkt.feasibility = viol;
    return {objective_gap(value, ref.value), viol, describe(value, ref.value, kkt)};
}

Outcome check_remote(Rng& rng, const kernels::Table& kern) {
    SystemConfig cfg = random_config(rng);
    std::size_t n = std::min(random_count(rng), cfg.num_tds);
    resize_devices(cfg, n);
    finalize(cfg);
    oracle::RemoteInstance in;
    SlotWeights w(n);
    for (std::size_t i = 0; i < n; ++i) {
        double h = random_gain(cfg, i, rng);
        w[i] = random_weights(cfg, h, i, rng);
        double chi = uni(rng, cfg.beta_min, 1.0);
        in.w3.push_back(w[i].w3);
        in.w4.push_back(w[i].w4);
        in.q_remote.push_back(maybe_zero(rng, 0.05, log_uni(rng, 1e3, 3e7)));
        in.G.push_back(intensity_ratio(chi, cfg.p_exp));
        in.H.push_back(result_ratio(chi, cfg.U));
    }
    auto sol = solve_remote_allocation(w, in.q_remote, in.G, in.H, cfg, kern);
    double value = oracle::remote_objective(in, sol.f, cfg);
    double ref = oracle::remote_oracle(in, cfg);
    auto kkt = oracle::remote_kkt(in, sol.f, sol.nu, cfg);
    return {objective_gap(value, ref), kkt.worst(), describe(value, ref, kkt)};
}

using Checker = std::function<Outcome(Rng&, const kernels::Table&)>;

Checker checker_for(Subproblem s) {
    switch (s) {
    case Subproblem::local_uplink: return check_local;
    case Subproblem::downlink: return check_downlink;
    case Subproblem::extraction: return check_extraction;
    case Subproblem::time_division: return check_time;
    case Subproblem::remote: return check_remote;
    }
    throw std::invalid_argument("unknown subproblem");
}

} // namespace

const char* subproblem_name(Subproblem s) {
    switch (s) {
    case Subproblem::local_uplink: return "local_uplink";
    case Subproblem::downlink: return "downlink";
    case Subproblem::extraction: return "extraction";
    case Subproblem::time_division: return "time_division";
    case Subproblem::remote: return "remote";
    }
    return "?";
}

std::vector<Subproblem> all_subproblems() {
    return {Subproblem::local_uplink, Subproblem::downlink, Subproblem::extraction,
            Subproblem::time_division, Subproblem::remote};
}

SystemConfig random_config(Rng& rng) {
    SystemConfig cfg = table_one_defaults(10);
    const double Vs[] = {1e15, 1e16, 1e17};
    cfg.V = Vs[static_cast<int>(uniform01(rng) * 3.0)];
    cfg.k = uniform01(rng) < 0.5 ? 3.0 : 4.0;
    cfg.beta_min = uni(rng, 0.25, 0.6);
    double a_cap = std::pow(cfg.beta_min, cfg.k - 1.0) / cfg.k;
    cfg.a = uni(rng, 0.0, 0.9) * a_cap;
    cfg.p_exp = uni(rng, 0.5, 2.0);
    // Tight server budgets make the coupling constraints bind.
    cfg.P_mec = log_uni(rng, 1e-3, 1.5);
    cfg.F_mec = log_uni(rng, 1e8, 30e9);
    finalize(cfg);
    return cfg;
}

double random_gain(const SystemConfig& cfg, std::size_t td, Rng& rng) {
    double mean = path_loss_gain(cfg.distances[td], cfg);
    return std::max(sample_channel(mean, cfg.rician_gamma, rng), 1e-6 * mean);
}

TdWeights random_weights(const SystemConfig& cfg, double h, std::size_t td, Rng& rng) {
    TdState s;
    s.q_local = log_uni(rng, 1e3, 5e7);
    s.q_remote = log_uni(rng, 1e3, 3e7);
    s.q_down = log_uni(rng, 1e3, 2e7);
    s.x_q = maybe_zero(rng, 0.3, log_uni(rng, 1e3, 1e9));
    s.x_r = maybe_zero(rng, 0.3, log_uni(rng, 1e3, 1e10));
    return compute_weights_td(s, h, td, cfg);
}

double objective_gap(double candidate, double oracle_value) {
    return std::abs(candidate - oracle_value) / (1.0 + std::abs(oracle_value));
}

SuiteResult run_suite(Subproblem s, const VerifyOptions& opts, const kernels::Table& kern) {
    SuiteResult res;
    res.subproblem = s;
    const double gap_tol = s == Subproblem::time_division ? opts.lp_gap_tol : opts.gap_tol;
    auto check = checker_for(s);
    auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < opts.instances; ++i) {
        Rng rng = make_stream(opts.seed, "verify", static_cast<std::uint64_t>(s),
                              static_cast<std::uint64_t>(i));
        ++res.instances;
        try {
            Outcome o = check(rng, kern);
            if (!(o.gap <= gap_tol)) ++res.gap_failures;
            if (!(o.kkt <= opts.kkt_tol)) ++res.kkt_failures;
            if (!(o.gap <= res.max_gap) || res.worst.empty()) {
                res.max_gap = std::isnan(o.gap) ? o.gap : std::max(res.max_gap, o.gap);
                res.worst = "instance " + std::to_string(i) + ": " + o.detail;
            }
            if (!(o.kkt <= res.max_kkt)) {
                res.max_kkt = o.kkt;
                res.worst_kkt = "instance " + std::to_string(i) + ": " + o.detail;
            }
        } catch (const std::exception& e) {
            ++res.errors;
            res.worst = "instance " + std::to_string(i) + ": " + e.what();
        }
    }
    res.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

std::vector<SuiteResult> run_all(const VerifyOptions& opts, const kernels::Table& kern) {
    std::vector<SuiteResult> out;
    for (auto s : all_subproblems()) out.push_back(run_suite(s, opts, kern));
    return out;
}

std::string format_result(const SuiteResult& r, const VerifyOptions& opts) {
    const double gap_tol =
        r.subproblem == Subproblem::time_division ? opts.lp_gap_tol : opts.gap_tol;
    char buf[1024];
    std::snprintf(buf, sizeof buf,
                  "%-14s %s  n=%d  max_gap=%.3e (tol %.0e, %d over)  max_kkt=%.3e (tol %.0e, "
                  "%d over)  errors=%d  %.2fs\n    worst gap: %s\n    worst kkt: %s",
                  subproblem_name(r.subproblem), r.passed() ? "PASS" : "FAIL", r.instances,
                  r.max_gap, gap_tol, r.gap_failures, r.max_kkt, opts.kkt_tol, r.kkt_failures,
                  r.errors, r.seconds, r.worst.c_str(), r.worst_kkt.c_str());
    return buf;
}

} // namespace semmec::verify
