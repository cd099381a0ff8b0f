// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.
#include <immintrin.h>

#include <cmath>

#include "origami/simd.hpp"

namespace origami::simd::detail {
namespace {

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4)
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

double squared_distance(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc = _mm256_fmadd_pd(d, d, acc);
    }
    double s = hsum(acc);
    for (; i < n; ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

void gemv(const double* rows, std::size_t n_rows, std::size_t dim, const double* x,
          double* out) {
    for (std::size_t r = 0; r < n_rows; ++r) out[r] = dot(rows + r * dim, x, dim);
}

void quadratic_kernel_row(const double* rows, std::size_t n_rows, std::size_t dim,
                          const double* x, double* out) {
    for (std::size_t r = 0; r < n_rows; ++r) {
        const double k = dot(rows + r * dim, x, dim) + 1.0;
        out[r] = k * k;
    }
}

void distances_from(const double* xs, const double* ys, std::size_t n, double px, double py,
                    double* out) {
    const __m256d vx = _mm256_set1_pd(px);
    const __m256d vy = _mm256_set1_pd(py);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(xs + i), vx);
        const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(ys + i), vy);
        const __m256d sq = _mm256_fmadd_pd(dx, dx, _mm256_mul_pd(dy, dy));
        _mm256_storeu_pd(out + i, _mm256_sqrt_pd(sq));
    }
    for (; i < n; ++i) {
        const double dx = xs[i] - px;
        const double dy = ys[i] - py;
        out[i] = std::sqrt(dx * dx + dy * dy);
    }
}

}  // namespace

const KernelTable* avx2_table() {
    static const KernelTable t{Isa::avx2, dot, squared_distance, gemv, quadratic_kernel_row,
                               distances_from};
    return &t;
}

}  // namespace origami::simd::detail
