// AVX2/FMA kernel variants. Compiled with -mavx2 -mfma for this translation
// unit only; callers reach these through the dispatch table after the cpuid
// check, so no AVX2 instruction executes on unsupported hardware.

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include "qfdi/kernels/dispatch.hpp"

namespace qfdi::kern {
namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d swapped = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
    __m256d av = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d yv = _mm256_loadu_pd(y + i);
        yv = _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), yv);
        _mm256_storeu_pd(y + i, yv);
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

void gemv_avx2(const double* A, const double* x, double* y,
               std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        y[r] = dot_avx2(A + r * cols, x, cols);
    }
}

void ger_avx2(double* A, const double* x, const double* y,
              std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        axpy_avx2(x[r], y, A + r * cols, cols);
    }
}

void vmul_avx2(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i),
                                                _mm256_loadu_pd(b + i)));
    }
    for (; i < n; ++i) out[i] = a[i] * b[i];
}

void vfma_avx2(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d o = _mm256_loadu_pd(out + i);
        o = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), o);
        _mm256_storeu_pd(out + i, o);
    }
    for (; i < n; ++i) out[i] += a[i] * b[i];
}

}  // namespace

const Kernels& avx2_kernels() {
    static const Kernels k{dot_avx2, axpy_avx2, gemv_avx2,
                           ger_avx2, vmul_avx2, vfma_avx2, "avx2"};
    return k;
}

}  // namespace qfdi::kern

#endif  // x86_64
