#include <cstdlib>
#include <cstring>

#include "toolmimic/kernels.hpp"

namespace toolmimic::kern {

bool avx2_supported() {
#if (defined(__x86_64__) || defined(_M_X64)) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

const Kernels& active() {
  static const Kernels* chosen = [] {
    const char* env = std::getenv("TOOLMIMIC_KERNELS");
    if (env != nullptr) {
      if (std::strcmp(env, "scalar") == 0) return &scalar();
      if (std::strcmp(env, "avx2") == 0 && avx2_supported()) return &avx2();
    }
    return avx2_supported() ? &avx2() : &scalar();
  }();
  return *chosen;
}

}  // namespace toolmimic::kern
