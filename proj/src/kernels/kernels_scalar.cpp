// Scalar reference kernels. These define the semantics the SIMD variants are
// equivalence-tested against.

#include "qfdi/kernels/dispatch.hpp"

namespace qfdi::kern {
namespace {

double dot_scalar(const double* x, const double* y, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void gemv_scalar(const double* A, const double* x, double* y,
                 std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        y[r] = dot_scalar(A + r * cols, x, cols);
    }
}

void ger_scalar(double* A, const double* x, const double* y,
                std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        axpy_scalar(x[r], y, A + r * cols, cols);
    }
}

void vmul_scalar(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void vfma_scalar(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] += a[i] * b[i];
}

}  // namespace

const Kernels& scalar_kernels() {
    static const Kernels k{dot_scalar, axpy_scalar, gemv_scalar,
                           ger_scalar, vmul_scalar, vfma_scalar, "scalar"};
    return k;
}

}  // namespace qfdi::kern
