#pragma once

#include "semmec/config.hpp"
#include "semmec/scheduler.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace semmec {

inline constexpr const char* kTraceHeader =
    "slot,td,policy,energy_total,energy_local,energy_uplink,energy_remote,energy_downlink,"
    "q_local,q_remote,q_down,x_q,x_r,beta,tau_u,tau_d,f_local,f_remote,p_uplink,p_downlink,"
    "proc_bits";

/// One device in one slot. Queue columns hold end-of-slot backlogs.
struct TraceRow {
    std::uint64_t slot = 0;
    std::uint64_t td = 0;
    double energy_total = 0.0, energy_local = 0.0, energy_uplink = 0.0, energy_remote = 0.0,
           energy_downlink = 0.0;
    double q_local = 0.0, q_remote = 0.0, q_down = 0.0, x_q = 0.0, x_r = 0.0;
    double beta = 1.0, tau_u = 0.0, tau_d = 0.0;
    double f_local = 0.0, f_remote = 0.0, p_uplink = 0.0, p_downlink = 0.0;
    double proc_bits = 0.0;
};

struct Trace {
    std::string config_hash;
    std::uint64_t seed = 0;
    Policy policy = Policy::drmsa;
    std::size_t num_tds = 0;
    std::vector<TraceRow> rows;  // slot-major, device-minor
};

/// Time averages of one run. Energy is the whole system's (J/s); queue and
/// rate figures are per device (bits, bits/s). `_post` fields cover slots
/// from `warmup` on.
struct Summary {
    std::string policy;
    std::uint64_t seed = 0;
    std::string config_hash;
    std::uint64_t slots = 0;
    std::uint64_t warmup = 0;
    std::size_t num_tds = 0;

    double energy = 0.0, energy_post = 0.0;
    double energy_local = 0.0, energy_uplink = 0.0, energy_remote = 0.0, energy_downlink = 0.0;
    double q_total = 0.0, q_total_post = 0.0;
    double q_total_worst_td = 0.0, q_total_worst_td_post = 0.0;
    double rate = 0.0, rate_post = 0.0;
    double rate_worst_td = 0.0, rate_worst_td_post = 0.0;
    double beta = 0.0;  // mean extraction factor after warmup

    // Device means of x(T)/T and x(T/2)/(T/2).
    double x_q_ratio = 0.0, x_r_ratio = 0.0;
    double x_q_half_ratio = 0.0, x_r_half_ratio = 0.0;
    double backlog_end = 0.0;  // device mean of x_q(T) + x_r(T)

    double mean_rounds = 0.0;
    std::uint64_t extraction_flags = 0;
    std::uint64_t time_clamps = 0;
    std::uint64_t infeasible_targets = 0;

    bool q_violation = false;     // some device's post-warmup mean Q exceeds Q_avg
    bool rate_violation = false;  // some device's post-warmup mean rate is below R_avg
};

struct RunOptions {
    SimOptions sim;
    bool keep_trace = true;
    std::uint64_t warmup = 2000;
    std::uint64_t slots = 0;  // 0: the config's horizon
};

struct RunResult {
    SystemConfig config;  // as simulated, horizon included
    Trace trace;
    Summary summary;
    // System totals per slot, kept even without the trace.
    std::vector<double> slot_energy;   // J
    std::vector<double> slot_q_total;  // bits, device mean
    std::vector<double> slot_rate;     // bits/s, device mean
};

/// A failure inside run(); the message carries the slot and a state dump.
class RunError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

RunResult run(const SystemConfig& cfg, Policy policy, std::uint64_t seed,
              const RunOptions& opts = {});

// Mean of `series` over the `window` entries ending at index `end` (inclusive).
double running_mean(const std::vector<double>& series, std::size_t end, std::size_t window);

struct SweepSpec {
    std::string name;
    std::string parameter;
    std::vector<double> values;
    std::vector<Policy> policies{Policy::drmsa};
    int replications = 1;
    std::uint64_t base_seed = 1;
    std::uint64_t slots = 0;  // 0: the config's horizon
};

/// Parses a sweep file: `parameter`, `values`, `policies`, `replications`,
/// `base_seed`, `slots`, one `key = value` per line.
SweepSpec parse_sweep_text(std::string_view text);
SweepSpec load_sweep(const std::filesystem::path& path);
/// Named presets for the paper figure families: fig6-v, fig7-arrivals,
/// fig8-qavg, fig9-ravg, fig10-betamin, fig11-pexp.
SweepSpec sweep_preset(std::string_view name);
std::vector<std::string> sweep_preset_names();
void validate_sweep(const SweepSpec& spec, const SystemConfig& cfg);

struct SweepRow {
    std::string parameter;
    double value = 0.0;
    Policy policy = Policy::drmsa;
    int replication = 0;
    std::uint64_t seed = 0;
    Summary summary;
    std::string error;  // empty when the cell succeeded
};

/// One run per (value, policy, replication), replication r using seed
/// base_seed + r. Cells run on `workers` threads; the row order and every
/// number are independent of the worker count.
std::vector<SweepRow> sweep(const SweepSpec& spec, const SystemConfig& cfg, int workers = 1,
                            const SimOptions& sim = {});

void write_trace_csv(const Trace& trace, const std::filesystem::path& path);
Trace read_trace_csv(const std::filesystem::path& path);
std::string summary_json(const Summary& s);
/// trace.csv, summary.json and config.txt in `out_dir` (created if missing).
void write_outputs(const RunResult& result, const std::filesystem::path& out_dir);
void write_sweep_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path);

} // namespace semmec
