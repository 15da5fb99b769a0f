#pragma once

// Data-parallel inner loops shared by the solvers and the spatial index.
//
// Every kernel has a scalar reference implementation; vectorized variants
// are compiled into separate translation units with their own target flags
// and selected once at runtime from the host CPU features. Setting the
// environment variable MFD3D_SIMD to `scalar`, `avx2` or `neon` forces a
// particular variant (an unavailable one falls back to scalar).

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace mfd3d::simd {

enum class Isa { Scalar, Avx2, Neon };

using ColIndex = std::int32_t;

struct KernelTable {
  Isa isa;
  double (*dot)(const double *a, const double *b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double *x, double *y, std::size_t n);
  // y = A x for a CSR matrix with `rows` rows
  void (*csr_spmv)(std::size_t rows, const std::size_t *offsets, const ColIndex *cols,
                   const double *vals, const double *x, double *y);
  // out[i] = (xs[i]-qx)^2 + (ys[i]-qy)^2 + (zs[i]-qz)^2, associated left to right
  void (*squared_distances)(const double *xs, const double *ys, const double *zs, std::size_t n,
                            double qx, double qy, double qz, double *out);
};

bool isa_available(Isa isa) noexcept;
std::string_view isa_name(Isa isa) noexcept;

/// Table for a specific instruction set; the scalar table when `isa` is unavailable.
const KernelTable &kernels_for(Isa isa) noexcept;

/// Table selected for this process.
const KernelTable &active() noexcept;

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}

namespace detail {
extern const KernelTable scalar_table;
#if defined(MFD3D_HAVE_AVX2)
extern const KernelTable avx2_table;
#endif
#if defined(MFD3D_HAVE_NEON)
extern const KernelTable neon_table;
#endif
} // namespace detail

} // namespace mfd3d::simd
