#include <atomic>
#include <cstdlib>
#include <string>

#include "origami/error.hpp"
#include "origami/simd.hpp"

namespace origami::simd {

namespace detail {
#if !defined(ORIGAMI_HAVE_AVX2)
const KernelTable* avx2_table() { return nullptr; }
#endif
#if !defined(ORIGAMI_HAVE_NEON)
const KernelTable* neon_table() { return nullptr; }
#endif
}  // namespace detail

std::string_view isa_name(Isa isa) {
    switch (isa) {
        case Isa::scalar: return "scalar";
        case Isa::avx2: return "avx2";
        case Isa::neon: return "neon";
    }
    return "unknown";
}

bool supported(Isa isa) {
    switch (isa) {
        case Isa::scalar: return true;
        case Isa::avx2:
#if defined(ORIGAMI_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
            return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
            return false;
#endif
        case Isa::neon: return detail::neon_table() != nullptr;
    }
    return false;
}

const KernelTable& table(Isa isa) {
    if (!supported(isa))
        throw ConfigError("SIMD variant '" + std::string(isa_name(isa)) +
                          "' is not available on this machine");
    switch (isa) {
        case Isa::avx2: return *detail::avx2_table();
        case Isa::neon: return *detail::neon_table();
        case Isa::scalar: break;
    }
    return detail::scalar_table();
}

namespace {

Isa detect() {
    if (const char* env = std::getenv("ORIGAMI_SIMD")) {
        const std::string_view want(env);
        for (Isa isa : {Isa::scalar, Isa::avx2, Isa::neon})
            if (want == isa_name(isa) && supported(isa)) return isa;
        return Isa::scalar;
    }
    if (supported(Isa::avx2)) return Isa::avx2;
    if (supported(Isa::neon)) return Isa::neon;
    return Isa::scalar;
}

std::atomic<const KernelTable*>& current() {
    static std::atomic<const KernelTable*> t{&table(detect())};
    return t;
}

}  // namespace

const KernelTable& active() { return *current().load(std::memory_order_acquire); }

Isa set_active(Isa isa) {
    const KernelTable* next = &table(isa);
    return current().exchange(next, std::memory_order_acq_rel)->isa;
}

}  // namespace origami::simd
