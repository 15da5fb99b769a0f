#include "mfd3d/simd.hpp"

#include <cstdlib>
#include <string_view>

namespace mfd3d::simd {

bool isa_available(Isa isa) noexcept {
  switch (isa) {
  case Isa::Scalar:
    return true;
  case Isa::Avx2:
#if defined(MFD3D_HAVE_AVX2)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
  case Isa::Neon:
#if defined(MFD3D_HAVE_NEON)
    return true;
#else
    return false;
#endif
  }
  return false;
}

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
  case Isa::Scalar:
    return "scalar";
  case Isa::Avx2:
    return "avx2";
  case Isa::Neon:
    return "neon";
  }
  return "unknown";
}

const KernelTable &kernels_for(Isa isa) noexcept {
  if (!isa_available(isa)) return detail::scalar_table;
  switch (isa) {
#if defined(MFD3D_HAVE_AVX2)
  case Isa::Avx2:
    return detail::avx2_table;
#endif
#if defined(MFD3D_HAVE_NEON)
  case Isa::Neon:
    return detail::neon_table;
#endif
  default:
    return detail::scalar_table;
  }
}

namespace {

const KernelTable &select() noexcept {
  if (const char *env = std::getenv("MFD3D_SIMD")) {
    const std::string_view want(env);
    for (Isa isa : {Isa::Scalar, Isa::Avx2, Isa::Neon})
      if (want == isa_name(isa)) return kernels_for(isa);
  }
  if (isa_available(Isa::Avx2)) return kernels_for(Isa::Avx2);
  if (isa_available(Isa::Neon)) return kernels_for(Isa::Neon);
  return detail::scalar_table;
}

} // namespace

const KernelTable &active() noexcept {
  static const KernelTable &table = select();
  return table;
}

} // namespace mfd3d::simd
