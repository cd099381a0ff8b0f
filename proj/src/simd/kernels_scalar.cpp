#include <cmath>

#include "origami/simd.hpp"

namespace origami::simd::detail {
namespace {

double dot(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

double squared_distance(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
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
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = xs[i] - px;
        const double dy = ys[i] - py;
        out[i] = std::sqrt(dx * dx + dy * dy);
    }
}

}  // namespace

const KernelTable& scalar_table() {
    static const KernelTable t{Isa::scalar, dot, squared_distance, gemv, quadratic_kernel_row,
                               distances_from};
    return t;
}

}  // namespace origami::simd::detail
