#pragma once

#include <cstddef>
#include <string_view>

namespace finsage::kernels {

// Dense double-precision inner loops behind all tensor arithmetic.
//
// Two implementations ship: a scalar reference and an AVX2 variant, selected
// once at runtime from CPU capabilities (override with select() or the
// FINSAGE_KERNELS environment variable: "scalar", "avx2", "auto").
//
// The element-wise kernels (axpy, vadd, vsub, vmul, vscale) are bit-exact
// across backends: the AVX2 code performs the same unfused multiply/add per
// element as the scalar loop. The reductions (dot, sum, sumsq) accumulate in
// lanes and so may differ from the scalar order by normal rounding; the
// equivalence suite bounds that difference.
struct Backend {
  const char* name;
  // y[i] += a * x[i]
  void (*axpy)(std::size_t n, double a, const double* x, double* y);
  // out[i] = x[i] + y[i]
  void (*vadd)(std::size_t n, const double* x, const double* y, double* out);
  // out[i] = x[i] - y[i]
  void (*vsub)(std::size_t n, const double* x, const double* y, double* out);
  // out[i] = x[i] * y[i]
  void (*vmul)(std::size_t n, const double* x, const double* y, double* out);
  // out[i] = a * x[i]
  void (*vscale)(std::size_t n, double a, const double* x, double* out);
  double (*dot)(std::size_t n, const double* x, const double* y);
  double (*sum)(std::size_t n, const double* x);
  double (*sumsq)(std::size_t n, const double* x);
};

const Backend& scalar_backend();

// Null when the binary was built without AVX2 support or the CPU lacks it.
const Backend* avx2_backend();

// The backend all tensor code routes through.
const Backend& active();

// Force a backend ("scalar", "avx2") or restore CPU-based choice ("auto").
// Returns false (and leaves the selection unchanged) if unavailable.
bool select(std::string_view name);

}  // namespace finsage::kernels
