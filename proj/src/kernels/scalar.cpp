#include "semmec/kernels.hpp"

#include <cmath>

namespace semmec::kernels::scalar {

// The comparisons mirror the vector max/min instructions exactly (a > b ? a
// : b and a < b ? a : b) so the SIMD variants reproduce these bits.
void downlink_power(const double* num, const double* den, const double* off, const double* cap,
                    double mu, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        double p = num[i] / (den[i] + mu) - off[i];
        p = p > 0.0 ? p : 0.0;
        out[i] = p < cap[i] ? p : cap[i];
    }
}

void remote_freq(const double* phi, const double* d, const double* cap, double nu, double* out,
                 std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        double s = phi[i] + nu;
        if (s >= 0.0) {
            out[i] = 0.0;
            continue;
        }
        double f = std::sqrt(-s / d[i]);
        out[i] = f < cap[i] ? f : cap[i];
    }
}

} // namespace semmec::kernels::scalar
