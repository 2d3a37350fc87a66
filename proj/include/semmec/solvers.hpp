#pragma once

#include "semmec/config.hpp"
#include "semmec/errors.hpp"
#include "semmec/kernels.hpp"
#include "semmec/model.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace semmec {

struct TdWeights {
    double w1 = 0.0, w2 = 0.0, w3 = 0.0, w4 = 0.0;
    double c_max = 0.0;
};
using SlotWeights = std::vector<TdWeights>;

enum class Monotone { decreasing, increasing };

/// Search domain for a one-dimensional multiplier.
///
/// For a decreasing residual the search is a dual search: `lower` is
/// returned when residual(lower) <= 0 already, otherwise the upper end is
/// doubled until the residual is <= 0 and the bracket is shrunk, returning
/// its feasible end. For an increasing residual it is a root search with the
/// roles of the signs swapped.
struct BisectionSpec {
    double lower = 0.0;
    double upper = 1.0;
    double tolerance = 0.0;  // absolute; a 1e-14 relative floor always applies
    int max_iters = 600;
    Monotone direction = Monotone::decreasing;
};

// Largest upper end the doubling phase may reach.
inline constexpr double kBisectionCap = 0x1.0p200;

template <class Residual>
double bisect(Residual&& residual, const BisectionSpec& spec) {
    if (!(spec.lower <= spec.upper)) throw ConvergenceError("bisect: lower > upper");
    const double sign = spec.direction == Monotone::decreasing ? 1.0 : -1.0;
    auto g = [&](double x) { return sign * residual(x); };
    double lo = spec.lower;
    if (g(lo) <= 0.0) return lo;
    double hi = spec.upper > lo ? spec.upper : lo + 1.0;
    int iters = 0;
    while (g(hi) > 0.0) {
        lo = hi;
        hi = hi > 0.0 ? 2.0 * hi : 1.0;
        if (hi > kBisectionCap || ++iters > spec.max_iters)
            throw ConvergenceError("bisect: residual never changes sign up to " +
                                   std::to_string(hi) + " (residual " +
                                   std::to_string(residual(lo)) + ")");
    }
    while (hi - lo > spec.tolerance && hi - lo > 1e-14 * std::abs(hi)) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (g(mid) > 0.0) lo = mid;
        else hi = mid;
        if (++iters > spec.max_iters)
            throw ConvergenceError("bisect: no convergence within max_iters, bracket [" +
                                   std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    return hi;
}

struct DownlinkResult {
    std::vector<double> p;
    double mu = 0.0;
};

/// Downlink power for every device given the time split. Devices with
/// tau_d = 0 get p = 0 and do not enter the power budget.
DownlinkResult solve_downlink_power(const SlotWeights& w, const std::vector<double>& tau_d,
                                    const std::vector<double>& h,
                                    const std::vector<double>& q_down, const SystemConfig& cfg,
                                    const kernels::Table& kern = kernels::active());

// Per-device cap on downlink power: no more than what empties q_down.
double downlink_power_cap(double h, double q_down, double tau_d, const SystemConfig& cfg);

struct LocalUplinkResult {
    double f_local = 0.0;
    double r_uplink = 0.0;
    double rho = 0.0;
};

/// Local CPU frequency and uplink rate of one device at fixed beta and time
/// split. With local_enabled = false the frequency is held at 0.
LocalUplinkResult solve_local_and_uplink(const TdWeights& w, double beta, double tau_u, double h,
                                         double q_local, std::size_t td, const SystemConfig& cfg,
                                         bool local_enabled = true);

// Closed forms at a fixed multiplier, exposed for property tests.
double local_freq_at(const TdWeights& w, double rho, std::size_t td, const SystemConfig& cfg);
double uplink_rate_at(const TdWeights& w, double rho, double beta, double tau_u, double h,
                      std::size_t td, const SystemConfig& cfg);

struct ExtractionResult {
    double beta = 1.0;
    double xi = 0.0;
    int iterations = 0;
    bool flagged = false;  // no feasible improvement; incumbent returned
};

/// Successive convex approximation over the extraction factor of one device.
ExtractionResult solve_extraction_factor(const TdWeights& w, double f_local, double r_uplink,
                                         double tau_u, double q_local, std::size_t td,
                                         const SystemConfig& cfg, double beta_init);

struct TimeSplit {
    double tau_u = 0.0;
    double tau_d = 0.0;
    bool clamped = false;  // a post-clamp changed the case-table value
};

TimeSplit solve_time_division(const TdWeights& w, double f_local, double r_uplink,
                              double p_uplink, double p_downlink, double beta, double h,
                              double q_local, double q_down, std::size_t td,
                              const SystemConfig& cfg);

struct RemoteResult {
    std::vector<double> f;
    double nu = 0.0;
};

RemoteResult solve_remote_allocation(const SlotWeights& w, const std::vector<double>& q_remote,
                                     const std::vector<double>& G, const std::vector<double>& H,
                                     const SystemConfig& cfg,
                                     const kernels::Table& kern = kernels::active());

// Local-side drift-plus-penalty value of one device and of the whole slot.
double local_objective_td(const TdWeights& w, const SlotDecision& d, std::size_t n, double h,
                          const SystemConfig& cfg);
double eval_local_objective(const SlotWeights& w, const SlotDecision& d,
                            const std::vector<double>& h, const SystemConfig& cfg);
double eval_remote_objective(const SlotWeights& w, const std::vector<double>& f_remote,
                             const std::vector<double>& G, const std::vector<double>& H,
                             const SystemConfig& cfg);

} // namespace semmec
