#pragma once

// Data-parallel inner kernels with a scalar reference and SIMD variants.
// The variant is chosen once at first use from the running CPU; the
// ORIGAMI_SIMD environment variable ("scalar", "avx2", "neon") overrides it.

#include <cstddef>
#include <span>
#include <string_view>

#include "origami/vec.hpp"

namespace origami::simd {

enum class Isa { scalar, avx2, neon };

std::string_view isa_name(Isa isa);

struct KernelTable {
    Isa isa;
    double (*dot)(const double* a, const double* b, std::size_t n);
    double (*squared_distance)(const double* a, const double* b, std::size_t n);
    // out[i] = rows[i] . x for a row-major rows matrix of shape (n_rows, dim).
    void (*gemv)(const double* rows, std::size_t n_rows, std::size_t dim, const double* x,
                 double* out);
    // out[i] = (rows[i] . x + 1)^2
    void (*quadratic_kernel_row)(const double* rows, std::size_t n_rows, std::size_t dim,
                                 const double* x, double* out);
    // out[i] = |(xs[i], ys[i]) - (px, py)|
    void (*distances_from)(const double* xs, const double* ys, std::size_t n, double px,
                           double py, double* out);
};

// True when the CPU (and the build) can run the given variant.
bool supported(Isa isa);

// Table for a specific variant; throws ConfigError when unsupported.
const KernelTable& table(Isa isa);

// Currently dispatched table.
const KernelTable& active();

// Overrides the dispatched variant, returning the previous one. Intended for
// equivalence tests and benchmarking.
Isa set_active(Isa isa);

inline double dot(std::span<const double> a, std::span<const double> b) {
    return active().dot(a.data(), b.data(), a.size());
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
    return active().squared_distance(a.data(), b.data(), a.size());
}

inline void distances_from(std::span<const double> xs, std::span<const double> ys, Vec2 p,
                           std::span<double> out) {
    active().distances_from(xs.data(), ys.data(), xs.size(), p.x, p.y, out.data());
}

namespace detail {
const KernelTable& scalar_table();
const KernelTable* avx2_table();  // nullptr when not compiled in
const KernelTable* neon_table();
}  // namespace detail

}  // namespace origami::simd
