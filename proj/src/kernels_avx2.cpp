// AVX2 kernels. Compiled with -mavx2 in its own translation unit; callers
// reach it only through the dispatch table after a CPU check.
//
// Lane mapping: every vector lane owns one output element, reductions keep
// their scalar iteration order, and mul/add stay separate instructions.
// Combined with -ffp-contract=off this makes the results bit-identical to
// the scalar reference kernels.

#include "ilgaco/kernels.hpp"

#if defined(__AVX2__)

#include <immintrin.h>

namespace ilgaco::kernels {
namespace {

void matmul_acc_avx2(const double* a, const double* b, double* c,
                     size_t m, size_t k, size_t n) {
    for (size_t i = 0; i < m; ++i) {
        const double* arow = a + i * k;
        double* crow = c + i * n;
        size_t j = 0;
        // 16-wide tiles: the c tile stays in registers across the whole
        // reduction, one broadcast feeds four vectors.
        for (; j + 16 <= n; j += 16) {
            __m256d c0 = _mm256_loadu_pd(crow + j);
            __m256d c1 = _mm256_loadu_pd(crow + j + 4);
            __m256d c2 = _mm256_loadu_pd(crow + j + 8);
            __m256d c3 = _mm256_loadu_pd(crow + j + 12);
            for (size_t p = 0; p < k; ++p) {
                const __m256d s = _mm256_set1_pd(arow[p]);
                const double* brow = b + p * n + j;
                c0 = _mm256_add_pd(c0, _mm256_mul_pd(s, _mm256_loadu_pd(brow)));
                c1 = _mm256_add_pd(c1, _mm256_mul_pd(s, _mm256_loadu_pd(brow + 4)));
                c2 = _mm256_add_pd(c2, _mm256_mul_pd(s, _mm256_loadu_pd(brow + 8)));
                c3 = _mm256_add_pd(c3, _mm256_mul_pd(s, _mm256_loadu_pd(brow + 12)));
            }
            _mm256_storeu_pd(crow + j, c0);
            _mm256_storeu_pd(crow + j + 4, c1);
            _mm256_storeu_pd(crow + j + 8, c2);
            _mm256_storeu_pd(crow + j + 12, c3);
        }
        for (; j + 4 <= n; j += 4) {
            __m256d c0 = _mm256_loadu_pd(crow + j);
            for (size_t p = 0; p < k; ++p) {
                const __m256d s = _mm256_set1_pd(arow[p]);
                c0 = _mm256_add_pd(c0, _mm256_mul_pd(s, _mm256_loadu_pd(b + p * n + j)));
            }
            _mm256_storeu_pd(crow + j, c0);
        }
        for (; j < n; ++j) {
            double acc = crow[j];
            for (size_t p = 0; p < k; ++p) {
                acc += arow[p] * b[p * n + j];
            }
            crow[j] = acc;
        }
    }
}

void relu_avx2(const double* x, double* y, size_t n) {
    const __m256d zero = _mm256_setzero_pd();
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(y + i, _mm256_max_pd(_mm256_loadu_pd(x + i), zero));
    }
    for (; i < n; ++i) {
        y[i] = x[i] > 0.0 ? x[i] : 0.0;
    }
}

void relu_backward_avx2(const double* pre, const double* dy, double* dx, size_t n) {
    const __m256d zero = _mm256_setzero_pd();
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d mask = _mm256_cmp_pd(_mm256_loadu_pd(pre + i), zero, _CMP_GT_OQ);
        _mm256_storeu_pd(dx + i, _mm256_and_pd(mask, _mm256_loadu_pd(dy + i)));
    }
    for (; i < n; ++i) {
        dx[i] = pre[i] > 0.0 ? dy[i] : 0.0;
    }
}

void axpy_avx2(double alpha, const double* x, double* y, size_t n) {
    const __m256d s = _mm256_set1_pd(alpha);
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d yy = _mm256_loadu_pd(y + i);
        _mm256_storeu_pd(y + i, _mm256_add_pd(yy, _mm256_mul_pd(s, _mm256_loadu_pd(x + i))));
    }
    for (; i < n; ++i) {
        y[i] += alpha * x[i];
    }
}

void adam_update_avx2(double* param, double* m, double* v, const double* g,
                      size_t n, double lr, double beta1, double beta2,
                      double eps, double bc1, double bc2) {
    const __m256d vb1 = _mm256_set1_pd(beta1);
    const __m256d vb2 = _mm256_set1_pd(beta2);
    const __m256d v1mb1 = _mm256_set1_pd(1.0 - beta1);
    const __m256d v1mb2 = _mm256_set1_pd(1.0 - beta2);
    const __m256d vbc1 = _mm256_set1_pd(bc1);
    const __m256d vbc2 = _mm256_set1_pd(bc2);
    const __m256d veps = _mm256_set1_pd(eps);
    const __m256d vlr = _mm256_set1_pd(lr);
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d gi = _mm256_loadu_pd(g + i);
        __m256d mi = _mm256_loadu_pd(m + i);
        __m256d vi = _mm256_loadu_pd(v + i);
        mi = _mm256_add_pd(_mm256_mul_pd(vb1, mi), _mm256_mul_pd(v1mb1, gi));
        vi = _mm256_add_pd(_mm256_mul_pd(vb2, vi), _mm256_mul_pd(v1mb2, _mm256_mul_pd(gi, gi)));
        _mm256_storeu_pd(m + i, mi);
        _mm256_storeu_pd(v + i, vi);
        const __m256d mhat = _mm256_div_pd(mi, vbc1);
        const __m256d vhat = _mm256_div_pd(vi, vbc2);
        const __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(vhat), veps);
        const __m256d step = _mm256_mul_pd(vlr, _mm256_div_pd(mhat, denom));
        _mm256_storeu_pd(param + i, _mm256_sub_pd(_mm256_loadu_pd(param + i), step));
    }
    if (i < n) {
        scalar_backend().adam_update(param + i, m + i, v + i, g + i, n - i,
                                     lr, beta1, beta2, eps, bc1, bc2);
    }
}

}  // namespace

const Backend* avx2_backend() {
    static const Backend backend{
        "avx2", matmul_acc_avx2, relu_avx2, relu_backward_avx2, axpy_avx2, adam_update_avx2,
    };
    return &backend;
}

}  // namespace ilgaco::kernels

#endif  // __AVX2__
