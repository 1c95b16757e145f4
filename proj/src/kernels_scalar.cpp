#include "sg/kernels.hpp"

#include <cmath>

namespace sg::kern::scalar {

float dot(const float* x, const float* y, size_t n) {
    float acc = 0.0f;
    for (size_t i = 0; i < n; ++i) acc = std::fma(x[i], y[i], acc);
    return acc;
}

// fma keeps lanes bit-identical to the FMA-based SIMD variants.
void axpy(float a, const float* x, float* y, size_t n) {
    for (size_t i = 0; i < n; ++i) y[i] = std::fma(a, x[i], y[i]);
}

void scale(float a, const float* x, float* y, size_t n) {
    for (size_t i = 0; i < n; ++i) y[i] = a * x[i];
}

void add(const float* x, const float* y, float* z, size_t n) {
    for (size_t i = 0; i < n; ++i) z[i] = x[i] + y[i];
}

void relu_fwd(const float* x, float* y, size_t n) {
    for (size_t i = 0; i < n; ++i) y[i] = x[i] > 0.0f ? x[i] : 0.0f;
}

void relu_bwd(const float* x, const float* dy, float* dx, size_t n) {
    for (size_t i = 0; i < n; ++i)
        if (x[i] > 0.0f) dx[i] += dy[i];
}

} // namespace sg::kern::scalar
