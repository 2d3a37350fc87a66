#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace semmec {

enum class ArrivalMode { stochastic, fixed };
enum class ChannelMode { stochastic, fixed };

/// All physical and algorithmic parameters of one simulated system.
///
/// Every field is stored in SI units (Hz, W, W/Hz, s, bits, bits/s). Fields
/// that exist once per terminal device are vectors of length `num_tds`; use
/// finalize() after editing to broadcast and validate them and to refresh the
/// cached noise power.
struct SystemConfig {
    std::size_t num_tds = 10;
    double bandwidth_B = 2e6;
    double noise_psd = 0.0;           // W/Hz, defaults to -174 dBm/Hz
    std::vector<double> intensity_I;  // cycles/bit
    double kappa_local = 1e-26;
    double kappa_mec = 1e-26;
    double slot_tau = 1.0;
    double V = 1e16;
    double a = 1e-3;
    double k = 4.0;
    double p_exp = 1.0;
    double U = 0.01;
    double Q_avg = 20e6;   // bits
    double R_avg = 4e6;    // bits/s
    std::vector<double> f_local_max;   // Hz
    double F_mec = 30e9;
    std::vector<double> p_uplink_max;  // W
    double P_mec = 1.5;
    double beta_min = 0.3;
    double antenna_gain_A = 3.0;
    double carrier_fc = 915e6;
    double pathloss_exp_ell = 3.0;
    double rician_gamma = 0.3;
    std::vector<double> distances;            // m
    std::vector<double> arrival_mean_lambda;  // bits
    std::uint64_t horizon_T = 20000;
    std::uint64_t seed = 1;
    ArrivalMode arrival_mode = ArrivalMode::stochastic;
    ChannelMode channel_mode = ChannelMode::stochastic;

    // Derived by finalize(): noise_psd * bandwidth_B.
    double noise_power = 0.0;
};

double dbm_per_hz_to_w_per_hz(double dbm_per_hz);

/// Distances spread evenly over [near, far].
std::vector<double> even_distances(std::size_t n, double near = 120.0, double far = 255.0);

/// The simulation parameter table with N terminal devices.
SystemConfig table_one_defaults(std::size_t num_tds = 10);

/// Broadcasts length-1 per-device vectors, checks every invariant, and caches
/// the noise power. Throws ConfigError naming the offending key.
void finalize(SystemConfig& cfg);

/// Changes the device count, re-spreading distances over the current range
/// and broadcasting the first entry of every other per-device vector.
void resize_devices(SystemConfig& cfg, std::size_t num_tds);

/// Parses the key-value config text. Unspecified keys keep their defaults.
/// Lines look like `key = value [unit]`; per-device keys accept a comma list.
SystemConfig parse_config_text(std::string_view text);
SystemConfig load_config(const std::filesystem::path& path);

/// Canonical text form, loadable by parse_config_text and bit-exact on
/// round trip. This text is also what the config hash covers.
std::string to_config_text(const SystemConfig& cfg);

std::uint64_t fnv1a64(std::string_view bytes);
std::string config_hash(const SystemConfig& cfg);

/// Sets one named scalar parameter (sweep axes). Throws ConfigError on an
/// unknown name.
void set_parameter(SystemConfig& cfg, std::string_view name, double value);

std::string format_double(double v);

} // namespace semmec
