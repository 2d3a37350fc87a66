#include "semmec/kernels.hpp"

#include <immintrin.h>

namespace semmec::kernels::avx2 {

void downlink_power(const double* num, const double* den, const double* off, const double* cap,
                    double mu, double* out, std::size_t n) {
    const __m256d vmu = _mm256_set1_pd(mu);
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d p = _mm256_div_pd(_mm256_loadu_pd(num + i),
                                  _mm256_add_pd(_mm256_loadu_pd(den + i), vmu));
        p = _mm256_sub_pd(p, _mm256_loadu_pd(off + i));
        p = _mm256_max_pd(p, zero);
        p = _mm256_min_pd(p, _mm256_loadu_pd(cap + i));
        _mm256_storeu_pd(out + i, p);
    }
    scalar::downlink_power(num + i, den + i, off + i, cap + i, mu, out + i, n - i);
}

void remote_freq(const double* phi, const double* d, const double* cap, double nu, double* out,
                 std::size_t n) {
    const __m256d vnu = _mm256_set1_pd(nu);
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d s = _mm256_add_pd(_mm256_loadu_pd(phi + i), vnu);
        __m256d active = _mm256_cmp_pd(s, zero, _CMP_LT_OQ);
        // Inactive lanes may produce NaN here; the blend discards them.
        __m256d f = _mm256_sqrt_pd(_mm256_div_pd(_mm256_sub_pd(zero, s), _mm256_loadu_pd(d + i)));
        f = _mm256_min_pd(f, _mm256_loadu_pd(cap + i));
        _mm256_storeu_pd(out + i, _mm256_blendv_pd(zero, f, active));
    }
    scalar::remote_freq(phi + i, d + i, cap + i, nu, out + i, n - i);
}

} // namespace semmec::kernels::avx2
