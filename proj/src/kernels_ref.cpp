// Scalar reference kernels. These define the numerical contract; the SIMD
// variants must reproduce them bit for bit.

#include "ilgaco/kernels.hpp"

#include <cmath>

namespace ilgaco::kernels {
namespace {

void matmul_acc_ref(const double* a, const double* b, double* c,
                    size_t m, size_t k, size_t n) {
    for (size_t i = 0; i < m; ++i) {
        const double* arow = a + i * k;
        double* crow = c + i * n;
        for (size_t p = 0; p < k; ++p) {
            const double s = arow[p];
            const double* brow = b + p * n;
            for (size_t j = 0; j < n; ++j) {
                crow[j] += s * brow[j];
            }
        }
    }
}

void relu_ref(const double* x, double* y, size_t n) {
    for (size_t i = 0; i < n; ++i) {
        y[i] = x[i] > 0.0 ? x[i] : 0.0;
    }
}

void relu_backward_ref(const double* pre, const double* dy, double* dx, size_t n) {
    for (size_t i = 0; i < n; ++i) {
        dx[i] = pre[i] > 0.0 ? dy[i] : 0.0;
    }
}

void axpy_ref(double alpha, const double* x, double* y, size_t n) {
    for (size_t i = 0; i < n; ++i) {
        y[i] += alpha * x[i];
    }
}

void adam_update_ref(double* param, double* m, double* v, const double* g,
                     size_t n, double lr, double beta1, double beta2,
                     double eps, double bc1, double bc2) {
    for (size_t i = 0; i < n; ++i) {
        const double gi = g[i];
        m[i] = beta1 * m[i] + (1.0 - beta1) * gi;
        v[i] = beta2 * v[i] + (1.0 - beta2) * (gi * gi);
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        param[i] -= lr * (mhat / (std::sqrt(vhat) + eps));
    }
}

}  // namespace

const Backend& scalar_backend() {
    static const Backend backend{
        "scalar", matmul_acc_ref, relu_ref, relu_backward_ref, axpy_ref, adam_update_ref,
    };
    return backend;
}

}  // namespace ilgaco::kernels
