#pragma once

#include "semmec/config.hpp"
#include "semmec/rng.hpp"

#include <cstddef>
#include <vector>

namespace semmec {

inline constexpr double kSpeedOfLight = 2.998e8;

double path_loss_gain(double d, const SystemConfig& cfg);

// Rician power gain with LoS fraction gamma; E[h] = mean_gain.
double sample_channel(double mean_gain, double gamma, Rng& rng);

// Exponential draw with the given mean (0 when mean is 0).
double sample_exponential(double mean, Rng& rng);

double uplink_rate(double h, double p, const SystemConfig& cfg);
double uplink_power(double h, double r, const SystemConfig& cfg);
double downlink_rate(double h, double p, const SystemConfig& cfg);
// Largest uplink rate reachable at the device's power cap.
double max_uplink_rate(double h, std::size_t td, const SystemConfig& cfg);

inline double local_rate(double f, double intensity) { return f / intensity; }
inline double local_power(double f, double kappa) { return kappa * f * f * f; }

double extraction_cost(double tau_u, double r_u, double beta, const SystemConfig& cfg);
double intensity_ratio(double min_chi, double p_exp);
double result_ratio(double min_chi, double U);
double remote_rate(double f_o, double G, double intensity);

/// Per-slot decision for all devices, one entry per device in each field.
struct SlotDecision {
    std::vector<double> f_local, r_uplink, p_uplink, p_downlink, beta, tau_u, tau_d, f_remote;

    SlotDecision() = default;
    explicit SlotDecision(std::size_t n)
        : f_local(n, 0.0), r_uplink(n, 0.0), p_uplink(n, 0.0), p_downlink(n, 0.0),
          beta(n, 1.0), tau_u(n, 0.0), tau_d(n, 0.0), f_remote(n, 0.0) {}
    std::size_t size() const { return f_local.size(); }
};

struct TdEnergy {
    double local = 0.0, uplink = 0.0, remote = 0.0, downlink = 0.0;
    double total() const { return local + uplink + remote + downlink; }
};

TdEnergy td_energy(const SlotDecision& d, std::size_t n, const SystemConfig& cfg);
std::vector<TdEnergy> slot_energy(const SlotDecision& d, const SystemConfig& cfg);

/// Empty string when the decision meets every box, capacity, time and
/// rate/power constraint; otherwise a description of the first violation.
std::string check_decision(const SlotDecision& d, const std::vector<double>& gains,
                           const SystemConfig& cfg, double rel_tol = 1e-9);

} // namespace semmec
