#include "mfd3d/simd.hpp"

namespace mfd3d::simd::detail {
namespace {

double dot_scalar(const double *a, const double *b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_scalar(double alpha, const double *x, double *y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void csr_spmv_scalar(std::size_t rows, const std::size_t *offsets, const ColIndex *cols,
                     const double *vals, const double *x, double *y) {
  for (std::size_t r = 0; r < rows; ++r) {
    double s = 0.0;
    for (std::size_t p = offsets[r]; p < offsets[r + 1]; ++p) s += vals[p] * x[cols[p]];
    y[r] = s;
  }
}

void squared_distances_scalar(const double *xs, const double *ys, const double *zs, std::size_t n,
                              double qx, double qy, double qz, double *out) {
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = xs[i] - qx;
    const double dy = ys[i] - qy;
    const double dz = zs[i] - qz;
    out[i] = dx * dx + dy * dy + dz * dz;
  }
}

} // namespace

const KernelTable scalar_table{Isa::Scalar, dot_scalar, axpy_scalar, csr_spmv_scalar,
                               squared_distances_scalar};

} // namespace mfd3d::simd::detail
