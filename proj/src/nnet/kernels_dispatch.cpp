#include <cstdlib>
#include <string_view>

#include "domino/kernels.hpp"
#include "kernels_impl.hpp"

namespace domino::nnet::kernels {

const KernelTable* avx2() {
#if defined(DOMINO_HAVE_AVX2)
  static const bool supported = [] {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  }();
  static const KernelTable table{"avx2", detail::conv3x3_avx2, detail::conv3x3_weight_grad_avx2};
  return supported ? &table : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active() {
  static const KernelTable& table = []() -> const KernelTable& {
    const char* forced = std::getenv("DOMINO_KERNELS");
    if (forced != nullptr && std::string_view(forced) == "scalar") return scalar();
    if (const KernelTable* fast = avx2()) return *fast;
    return scalar();
  }();
  return table;
}

}  // namespace domino::nnet::kernels
