#pragma once

#include <cstddef>
#include <string>

// Dense f32 inner-loop kernels. Scalar reference implementations are the
// semantic ground truth; SIMD variants are selected at runtime and must agree
// with the reference (bit-exact for elementwise ops, within reduction-order
// tolerance for dot). The f64 paths used by oracles and gradient checking stay
// scalar by design.
namespace sg::kern {

using DotFn     = float (*)(const float* x, const float* y, size_t n);
using AxpyFn    = void (*)(float a, const float* x, float* y, size_t n);  // y += a*x
using ScaleFn   = void (*)(float a, const float* x, float* y, size_t n);  // y = a*x
using AddFn     = void (*)(const float* x, const float* y, float* z, size_t n);
using ReluFwdFn = void (*)(const float* x, float* y, size_t n);
using ReluBwdFn = void (*)(const float* x, const float* dy, float* dx, size_t n);  // dx += dy·[x>0]

// Runtime-dispatched entry points.
extern DotFn dot;
extern AxpyFn axpy;
extern ScaleFn scale;
extern AddFn add;
extern ReluFwdFn relu_fwd;
extern ReluBwdFn relu_bwd;

namespace scalar {
float dot(const float* x, const float* y, size_t n);
void axpy(float a, const float* x, float* y, size_t n);
void scale(float a, const float* x, float* y, size_t n);
void add(const float* x, const float* y, float* z, size_t n);
void relu_fwd(const float* x, float* y, size_t n);
void relu_bwd(const float* x, const float* dy, float* dx, size_t n);
} // namespace scalar

#if defined(__x86_64__) || defined(__i386__)
namespace avx2 {
float dot(const float* x, const float* y, size_t n);
void axpy(float a, const float* x, float* y, size_t n);
void scale(float a, const float* x, float* y, size_t n);
void add(const float* x, const float* y, float* z, size_t n);
void relu_fwd(const float* x, float* y, size_t n);
void relu_bwd(const float* x, const float* dy, float* dx, size_t n);
} // namespace avx2
#endif

bool cpu_has_avx2();

// Currently selected backend: "scalar" or "avx2".
const char* active_isa();

// Select backend by name: "auto", "scalar", "avx2". Throws ConfigError for an
// unknown name or an ISA the CPU does not support.
void select_isa(const std::string& name);

} // namespace sg::kern
