#include "ccm/kernels.hpp"

namespace ccm::kernels::serial {

void explicit_update(const StencilView& v, double dt, std::span<double> H_out) {
  const bool has_fixed = !v.fixed.empty();
  for (int j = 0; j < v.nj; ++j) {
    for (int i = 0; i < v.ni; ++i) {
      const std::size_t k = static_cast<std::size_t>(j) * v.ni + i;
      if (has_fixed && v.fixed[k]) {
        H_out[k] = v.H[k];
        continue;
      }
      H_out[k] = v.H[k] + dt * node_rate(v, i, j) / v.volume[k];
    }
  }
}

}  // namespace ccm::kernels::serial
