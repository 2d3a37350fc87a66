#include "semmec/model.hpp"

#include "semmec/errors.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace semmec {

double path_loss_gain(double d, const SystemConfig& cfg) {
    if (!(d > 0.0)) throw DomainError("path_loss_gain: distance must be > 0");
    double ratio = kSpeedOfLight / (4.0 * std::numbers::pi * cfg.carrier_fc * d);
    return cfg.antenna_gain_A * std::pow(ratio, cfg.pathloss_exp_ell);
}

double sample_channel(double mean_gain, double gamma, Rng& rng) {
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw DomainError("sample_channel: gamma outside [0, 1]");
    if (!(mean_gain > 0.0)) throw DomainError("sample_channel: mean gain must be > 0");
    // Box-Muller gives two independent N(0, 1/2) parts.
    double u1 = uniform01(rng), u2 = uniform01(rng);
    double radius = std::sqrt(-std::log1p(-u1));
    double zr = radius * std::cos(2.0 * std::numbers::pi * u2);
    double zi = radius * std::sin(2.0 * std::numbers::pi * u2);
    double s = std::sqrt(1.0 - gamma);
    double re = std::sqrt(gamma) + s * zr;
    double im = s * zi;
    double h = mean_gain * (re * re + im * im);
    // A zero draw has probability zero but would break 1/h downstream.
    return h > 0.0 ? h : mean_gain * 1e-300;
}

double sample_exponential(double mean, Rng& rng) {
    if (mean <= 0.0) return 0.0;
    return -mean * std::log1p(-uniform01(rng));
}

double uplink_rate(double h, double p, const SystemConfig& cfg) {
    return cfg.bandwidth_B * std::log2(1.0 + h * p / cfg.noise_power);
}

double uplink_power(double h, double r, const SystemConfig& cfg) {
    return cfg.noise_power / h * std::expm1(r * std::numbers::ln2 / cfg.bandwidth_B);
}

double downlink_rate(double h, double p, const SystemConfig& cfg) { return uplink_rate(h, p, cfg); }

double max_uplink_rate(double h, std::size_t td, const SystemConfig& cfg) {
    return uplink_rate(h, cfg.p_uplink_max[td], cfg);
}

double extraction_cost(double tau_u, double r_u, double beta, const SystemConfig& cfg) {
    if (!(beta > 0.0)) throw DomainError("extraction_cost: beta must be > 0");
    return cfg.a * tau_u * r_u / std::pow(beta, cfg.k);
}

double intensity_ratio(double min_chi, double p_exp) {
    if (!(min_chi > 0.0)) throw DomainError("intensity_ratio: min_chi must be > 0");
    return 1.0 / std::pow(min_chi, p_exp);
}

double result_ratio(double min_chi, double U) {
    if (!(min_chi > 0.0)) throw DomainError("result_ratio: min_chi must be > 0");
    return U / min_chi;
}

double remote_rate(double f_o, double G, double intensity) { return f_o / (G * intensity); }

TdEnergy td_energy(const SlotDecision& d, std::size_t n, const SystemConfig& cfg) {
    TdEnergy e;
    e.local = cfg.slot_tau * local_power(d.f_local[n], cfg.kappa_local);
    e.uplink = d.tau_u[n] * d.p_uplink[n];
    e.remote = cfg.slot_tau * local_power(d.f_remote[n], cfg.kappa_mec);
    e.downlink = d.tau_d[n] * d.p_downlink[n];
    return e;
}

std::vector<TdEnergy> slot_energy(const SlotDecision& d, const SystemConfig& cfg) {
    std::vector<TdEnergy> out(d.size());
    for (std::size_t n = 0; n < d.size(); ++n) out[n] = td_energy(d, n, cfg);
    return out;
}

std::string check_decision(const SlotDecision& d, const std::vector<double>& gains,
                           const SystemConfig& cfg, double rel_tol) {
    const std::size_t N = cfg.num_tds;
    if (d.size() != N) return "decision size differs from num_tds";
    auto where = [](const char* what, std::size_t n) {
        return std::string(what) + " at td " + std::to_string(n);
    };
    double sum_p = 0.0, sum_f = 0.0;
    for (std::size_t n = 0; n < N; ++n) {
        for (double v : {d.f_local[n], d.r_uplink[n], d.p_uplink[n], d.p_downlink[n], d.beta[n],
                         d.tau_u[n], d.tau_d[n], d.f_remote[n]})
            if (!std::isfinite(v)) return where("non-finite field", n);
        if (d.f_local[n] < 0.0 || d.f_local[n] > cfg.f_local_max[n] * (1 + rel_tol))
            return where("f_local outside [0, f_local_max]", n);
        if (d.p_uplink[n] < 0.0 || d.p_uplink[n] > cfg.p_uplink_max[n] * (1 + rel_tol))
            return where("p_uplink outside [0, p_uplink_max]", n);
        if (d.p_downlink[n] < 0.0) return where("negative p_downlink", n);
        if (d.f_remote[n] < 0.0) return where("negative f_remote", n);
        if (d.beta[n] < cfg.beta_min * (1 - rel_tol) || d.beta[n] > 1.0 + rel_tol)
            return where("beta outside [beta_min, 1]", n);
        if (d.tau_u[n] < 0.0 || d.tau_d[n] < 0.0 ||
            d.tau_u[n] + d.tau_d[n] > cfg.slot_tau * (1 + rel_tol))
            return where("time split outside the slot", n);
        double p_expected = uplink_power(gains[n], d.r_uplink[n], cfg);
        if (std::abs(p_expected - d.p_uplink[n]) > rel_tol * std::max(1e-300, p_expected) + 1e-300)
            return where("uplink rate and power disagree", n);
        sum_p += d.p_downlink[n];
        sum_f += d.f_remote[n];
    }
    if (sum_p > cfg.P_mec * (1 + rel_tol)) return "downlink power sum above P_mec";
    if (sum_f > cfg.F_mec * (1 + rel_tol)) return "remote frequency sum above F_mec";
    return {};
}

} // namespace semmec
