#include <arm_neon.h>

#include <cmath>

#include "origami/simd.hpp"

namespace origami::simd::detail {
namespace {

double dot(const double* a, const double* b, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
        acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
    }
    double s = vaddvq_f64(vaddq_f64(acc0, acc1));
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

double squared_distance(const double* a, const double* b, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t d = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
        acc = vfmaq_f64(acc, d, d);
    }
    double s = vaddvq_f64(acc);
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
    const float64x2_t vx = vdupq_n_f64(px);
    const float64x2_t vy = vdupq_n_f64(py);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t dx = vsubq_f64(vld1q_f64(xs + i), vx);
        const float64x2_t dy = vsubq_f64(vld1q_f64(ys + i), vy);
        vst1q_f64(out + i, vsqrtq_f64(vfmaq_f64(vmulq_f64(dy, dy), dx, dx)));
    }
    for (; i < n; ++i) {
        const double dx = xs[i] - px;
        const double dy = ys[i] - py;
        out[i] = std::sqrt(dx * dx + dy * dy);
    }
}

}  // namespace

const KernelTable* neon_table() {
    static const KernelTable t{Isa::neon, dot, squared_distance, gemv, quadratic_kernel_row,
                               distances_from};
    return &t;
}

}  // namespace origami::simd::detail
