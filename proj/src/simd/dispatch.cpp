#include "pfa/simd.hpp"

#include "simd_detail.hpp"

#include <atomic>
#include <cstdlib>
#include <string_view>

namespace pfa::simd {

namespace {

constexpr KernelTable kScalar{
    Backend::Scalar,           detail::dot_scalar,      detail::wdot_scalar,
    detail::axpy_scalar,       detail::rotate_scalar,   detail::cdf_pair_scalar,
    detail::cdf_pair_sum_scalar,
};

#if defined(PFA_HAVE_AVX2_KERNELS)
constexpr KernelTable kAvx2{
    Backend::Avx2,           detail::dot_avx2,      detail::wdot_avx2,
    detail::axpy_avx2,       detail::rotate_avx2,   detail::cdf_pair_avx2,
    detail::cdf_pair_sum_avx2,
};

bool cpu_has_avx2() noexcept {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}
#endif

const KernelTable* pick_default() noexcept {
    if (const char* env = std::getenv("PFA_SIMD")) {
        if (std::string_view(env) == "scalar") return &kScalar;
    }
    if (const KernelTable* t = avx2_kernels()) return t;
    return &kScalar;
}

std::atomic<const KernelTable*>& current() noexcept {
    static std::atomic<const KernelTable*> table{pick_default()};
    return table;
}

}  // namespace

std::string_view to_string(Backend b) noexcept {
    switch (b) {
        case Backend::Scalar: return "scalar";
        case Backend::Avx2: return "avx2";
    }
    return "unknown";
}

const KernelTable& scalar_kernels() noexcept { return kScalar; }

const KernelTable* avx2_kernels() noexcept {
#if defined(PFA_HAVE_AVX2_KERNELS)
    static const bool ok = cpu_has_avx2();
    return ok ? &kAvx2 : nullptr;
#else
    return nullptr;
#endif
}

const KernelTable& active() noexcept { return *current().load(std::memory_order_relaxed); }

bool select(Backend b) noexcept {
    const KernelTable* t = b == Backend::Scalar ? &kScalar : avx2_kernels();
    if (t == nullptr) return false;
    current().store(t, std::memory_order_relaxed);
    return true;
}

}  // namespace pfa::simd
