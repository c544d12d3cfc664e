#pragma once

#include <cstddef>
#include <string_view>

namespace ilgaco::kernels {

// Hot inner loops used by the training stack. Each function exists as a
// scalar reference implementation and, on x86-64, an AVX2 variant chosen at
// runtime. Both variants perform the same floating-point operations in the
// same per-element order (vector lanes map to distinct output elements and
// no FMA contraction is allowed), so their results are bit-identical and
// training runs do not depend on the host's instruction set.
struct Backend {
    const char* name;

    // c[m x n] += a[m x k] * b[k x n], row-major. For every output element
    // the reduction over k runs in ascending order.
    void (*matmul_acc)(const double* a, const double* b, double* c,
                       size_t m, size_t k, size_t n);

    // y[i] = max(0, x[i])
    void (*relu)(const double* x, double* y, size_t n);

    // dx[i] = pre[i] > 0 ? dy[i] : 0
    void (*relu_backward)(const double* pre, const double* dy, double* dx, size_t n);

    // y[i] += alpha * x[i]
    void (*axpy)(double alpha, const double* x, double* y, size_t n);

    // One Adam update over n coordinates. bc1/bc2 are the bias corrections
    // 1 - beta1^t and 1 - beta2^t for the current step t.
    void (*adam_update)(double* param, double* m, double* v, const double* g,
                        size_t n, double lr, double beta1, double beta2,
                        double eps, double bc1, double bc2);
};

const Backend& scalar_backend();

// nullptr when the binary was built without AVX2 support.
const Backend* avx2_backend();

// True when avx2_backend() exists and the CPU can execute it.
bool avx2_supported();

// The backend training code calls through. Picked once: the ILGACO_KERNELS
// environment variable ("scalar" or "avx2") wins, otherwise the best
// supported backend.
const Backend& active();

// Force a backend by name; throws on unknown names or unsupported CPUs.
void select(std::string_view name);

}  // namespace ilgaco::kernels
