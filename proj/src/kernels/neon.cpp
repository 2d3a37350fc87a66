#include "semmec/kernels.hpp"

#include <arm_neon.h>

namespace semmec::kernels::neon {

// vmaxq/vminq differ from the scalar ternaries only for NaN inputs, which
// the solvers never pass in.
void downlink_power(const double* num, const double* den, const double* off, const double* cap,
                    double mu, double* out, std::size_t n) {
    const float64x2_t vmu = vdupq_n_f64(mu);
    const float64x2_t zero = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t p = vdivq_f64(vld1q_f64(num + i), vaddq_f64(vld1q_f64(den + i), vmu));
        p = vsubq_f64(p, vld1q_f64(off + i));
        p = vmaxq_f64(p, zero);
        p = vminq_f64(p, vld1q_f64(cap + i));
        vst1q_f64(out + i, p);
    }
    scalar::downlink_power(num + i, den + i, off + i, cap + i, mu, out + i, n - i);
}

void remote_freq(const double* phi, const double* d, const double* cap, double nu, double* out,
                 std::size_t n) {
    const float64x2_t vnu = vdupq_n_f64(nu);
    const float64x2_t zero = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t s = vaddq_f64(vld1q_f64(phi + i), vnu);
        uint64x2_t active = vcltq_f64(s, zero);
        float64x2_t f = vsqrtq_f64(vdivq_f64(vnegq_f64(s), vld1q_f64(d + i)));
        f = vminq_f64(f, vld1q_f64(cap + i));
        vst1q_f64(out + i, vbslq_f64(active, f, zero));
    }
    scalar::remote_freq(phi + i, d + i, cap + i, nu, out + i, n - i);
}

} // namespace semmec::kernels::neon
