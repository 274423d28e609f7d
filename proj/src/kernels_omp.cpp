#include "ccm/kernels.hpp"

#include <omp.h>

namespace ccm::kernels::omp {

void explicit_update(const StencilView& v, double dt, std::span<double> H_out) {
  const bool has_fixed = !v.fixed.empty();
  const int nj = v.nj;
  const int ni = v.ni;
#pragma omp parallel for schedule(static)
  for (int j = 0; j < nj; ++j) {
    for (int i = 0; i < ni; ++i) {
      const std::size_t k = static_cast<std::size_t>(j) * ni + i;
      if (has_fixed && v.fixed[k]) {
        H_out[k] = v.H[k];
        continue;
      }
      H_out[k] = v.H[k] + dt * node_rate(v, i, j) / v.volume[k];
    }
  }
}

}  // namespace ccm::kernels::omp
