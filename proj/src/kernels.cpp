#include "sg/kernels.hpp"

#include "sg/errors.hpp"

#if defined(__x86_64__) || defined(__i386__)
#include <cpuid.h>
#endif

namespace sg::kern {

DotFn dot = scalar::dot;
AxpyFn axpy = scalar::axpy;
ScaleFn scale = scalar::scale;
AddFn add = scalar::add;
ReluFwdFn relu_fwd = scalar::relu_fwd;
ReluBwdFn relu_bwd = scalar::relu_bwd;

namespace {
const char* g_active = "scalar";

void bind_scalar() {
    dot = scalar::dot;
    axpy = scalar::axpy;
    scale = scalar::scale;
    add = scalar::add;
    relu_fwd = scalar::relu_fwd;
    relu_bwd = scalar::relu_bwd;
    g_active = "scalar";
}

#if defined(__x86_64__) || defined(__i386__)
void bind_avx2() {
    dot = avx2::dot;
    axpy = avx2::axpy;
    scale = avx2::scale;
    add = avx2::add;
    relu_fwd = avx2::relu_fwd;
    relu_bwd = avx2::relu_bwd;
    g_active = "avx2";
}
#endif

} // namespace

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
    unsigned eax, ebx, ecx, edx;
    if (!__get_cpuid_count(7, 0, &eax, &ebx, &ecx, &edx)) return false;
    bool avx2_bit = (ebx & (1u << 5)) != 0;
    if (!__get_cpuid(1, &eax, &ebx, &ecx, &edx)) return false;
    bool fma_bit = (ecx & (1u << 12)) != 0;
    bool osxsave = (ecx & (1u << 27)) != 0;
    if (!avx2_bit || !fma_bit || !osxsave) return false;
    // XCR0: OS must preserve ymm state.
    uint32_t xcr0_lo, xcr0_hi;
    __asm__("xgetbv" : "=a"(xcr0_lo), "=d"(xcr0_hi) : "c"(0));
    return (xcr0_lo & 0x6) == 0x6;
#else
    return false;
#endif
}

const char* active_isa() { return g_active; }

void select_isa(const std::string& name) {
    if (name == "scalar") {
        bind_scalar();
        return;
    }
#if defined(__x86_64__) || defined(__i386__)
    if (name == "avx2") {
        if (!cpu_has_avx2()) throw ConfigError("isa 'avx2' requested but CPU lacks AVX2/FMA support");
        bind_avx2();
        return;
    }
#endif
    if (name == "auto") {
#if defined(__x86_64__) || defined(__i386__)
        if (cpu_has_avx2()) {
            bind_avx2();
            return;
        }
#endif
        bind_scalar();
        return;
    }
    throw ConfigError("unknown isa '" + name + "' (expected auto, scalar or avx2)");
}

namespace {
// Pick the best supported backend at load time.
const int g_init = [] {
    select_isa("auto");
    return 0;
}();
} // namespace

} // namespace sg::kern
