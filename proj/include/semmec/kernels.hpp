#pragma once

#include <cstddef>
#include <string_view>

// Per-device lane kernels used inside the downlink and remote dual searches.
// Each variant writes one value per lane; callers reduce in lane order so
// every variant gives bit-identical sums.
namespace semmec::kernels {

enum class Isa { scalar, avx2, neon };

// out[i] = min(max(0, num[i] / (den[i] + mu) - off[i]), cap[i])
using DownlinkFn = void (*)(const double* num, const double* den, const double* off,
                            const double* cap, double mu, double* out, std::size_t n);
// out[i] = phi[i] + nu >= 0 ? 0 : min(sqrt(-(phi[i] + nu) / d[i]), cap[i])
using RemoteFn = void (*)(const double* phi, const double* d, const double* cap, double nu,
                          double* out, std::size_t n);

struct Table {
    Isa isa;
    const char* name;
    DownlinkFn downlink_power;
    RemoteFn remote_freq;
};

bool available(Isa isa);
// Throws std::invalid_argument when the variant is not compiled in or the
// CPU lacks it.
const Table& table(Isa isa);
// Best available variant; SEMMEC_ISA=scalar|avx2|neon overrides.
const Table& active();
Isa parse_isa(std::string_view name);

namespace scalar {
void downlink_power(const double* num, const double* den, const double* off, const double* cap,
                    double mu, double* out, std::size_t n);
void remote_freq(const double* phi, const double* d, const double* cap, double nu, double* out,
                 std::size_t n);
} // namespace scalar

namespace avx2 {
void downlink_power(const double* num, const double* den, const double* off, const double* cap,
                    double mu, double* out, std::size_t n);
void remote_freq(const double* phi, const double* d, const double* cap, double nu, double* out,
                 std::size_t n);
} // namespace avx2

namespace neon {
void downlink_power(const double* num, const double* den, const double* off, const double* cap,
                    double mu, double* out, std::size_t n);
void remote_freq(const double* phi, const double* d, const double* cap, double nu, double* out,
                 std::size_t n);
} // namespace neon

} // namespace semmec::kernels
