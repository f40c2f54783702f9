#pragma once
// Runtime-dispatched math kernels: scalar reference implementations plus an
// AVX2/FMA variant selected by CPU capability. All tables compute the same
// contracts; SIMD variants may differ from scalar in the last ulps only.

#include <cstddef>

namespace qfdi::kern {

struct Kernels {
    // sum_i x[i]*y[i]
    double (*dot)(const double* x, const double* y, std::size_t n);
    // y += a*x
    void (*axpy)(double a, const double* x, double* y, std::size_t n);
    // y = A x, A row-major (rows x cols)
    void (*gemv)(const double* A, const double* x, double* y,
                 std::size_t rows, std::size_t cols);
    // A += x (x) y, A row-major (rows x cols)
    void (*ger)(double* A, const double* x, const double* y,
                std::size_t rows, std::size_t cols);
    // out = a .* b
    void (*vmul)(const double* a, const double* b, double* out, std::size_t n);
    // out += a .* b
    void (*vfma)(const double* a, const double* b, double* out, std::size_t n);
    const char* name;
};

enum class Isa { automatic, scalar, avx2 };

const Kernels& scalar_kernels();

#if defined(__x86_64__) || defined(_M_X64)
const Kernels& avx2_kernels();
bool cpu_has_avx2_fma();
#endif

// Active table. Defaults to the best supported variant; the QFDI_KERNELS
// environment variable ("scalar", "avx2", "auto") overrides the default at
// first use, select() overrides programmatically. Selecting an unsupported
// ISA throws.
const Kernels& active();
void select(Isa isa);
Isa selected();

}  // namespace qfdi::kern
