#include "finsage/kernels.hpp"

#include <cstdlib>
#include <string>

namespace finsage::kernels {

#if FINSAGE_WITH_AVX2
const Backend* avx2_backend_impl();
#endif

const Backend* avx2_backend() {
#if FINSAGE_WITH_AVX2
#if defined(__GNUC__) || defined(__clang__)
  if (!__builtin_cpu_supports("avx2")) return nullptr;
#endif
  return avx2_backend_impl();
#else
  return nullptr;
#endif
}

namespace {

const Backend* pick_auto() {
  if (const Backend* b = avx2_backend()) return b;
  return &scalar_backend();
}

const Backend* initial() {
  if (const char* env = std::getenv("FINSAGE_KERNELS")) {
    std::string_view want(env);
    if (want == "scalar") return &scalar_backend();
    if (want == "avx2") {
      if (const Backend* b = avx2_backend()) return b;
    }
  }
  return pick_auto();
}

const Backend*& current() {
  static const Backend* b = initial();
  return b;
}

}  // namespace

const Backend& active() { return *current(); }

bool select(std::string_view name) {
  if (name == "auto") {
    current() = pick_auto();
    return true;
  }
  if (name == "scalar") {
    current() = &scalar_backend();
    return true;
  }
  if (name == "avx2") {
    if (const Backend* b = avx2_backend()) {
      current() = b;
      return true;
    }
    return false;
  }
  return false;
}

}  // namespace finsage::kernels
