// Built only for aarch64 targets, where NEON is part of the base ISA.

#include "mfd3d/simd.hpp"

#include <arm_neon.h>

namespace mfd3d::simd::detail {
namespace {

double dot_neon(const double *a, const double *b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  double s = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_neon(double alpha, const double *x, double *y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void csr_spmv_neon(std::size_t rows, const std::size_t *offsets, const ColIndex *cols,
                   const double *vals, const double *x, double *y) {
  for (std::size_t r = 0; r < rows; ++r) {
    std::size_t p = offsets[r];
    const std::size_t end = offsets[r + 1];
    float64x2_t acc = vdupq_n_f64(0.0);
    for (; p + 2 <= end; p += 2) {
      const double gathered[2] = {x[cols[p]], x[cols[p + 1]]};
      acc = vfmaq_f64(acc, vld1q_f64(vals + p), vld1q_f64(gathered));
    }
    double s = vaddvq_f64(acc);
    for (; p < end; ++p) s += vals[p] * x[cols[p]];
    y[r] = s;
  }
}

void squared_distances_neon(const double *xs, const double *ys, const double *zs, std::size_t n,
                            double qx, double qy, double qz, double *out) {
  const float64x2_t vx = vdupq_n_f64(qx);
  const float64x2_t vy = vdupq_n_f64(qy);
  const float64x2_t vz = vdupq_n_f64(qz);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t dx = vsubq_f64(vld1q_f64(xs + i), vx);
    const float64x2_t dy = vsubq_f64(vld1q_f64(ys + i), vy);
    const float64x2_t dz = vsubq_f64(vld1q_f64(zs + i), vz);
    float64x2_t d = vaddq_f64(vmulq_f64(dx, dx), vmulq_f64(dy, dy));
    d = vaddq_f64(d, vmulq_f64(dz, dz));
    vst1q_f64(out + i, d);
  }
  for (; i < n; ++i) {
    const double dx = xs[i] - qx;
    const double dy = ys[i] - qy;
    const double dz = zs[i] - qz;
    out[i] = dx * dx + dy * dy + dz * dz;
  }
}

} // namespace

const KernelTable neon_table{Isa::Neon, dot_neon, axpy_neon, csr_spmv_neon,
                             squared_distances_neon};

} // namespace mfd3d::simd::detail
