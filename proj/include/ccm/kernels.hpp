#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace ccm::kernels {

/// Read-only view of one explicit finite-volume step on a structured block.
/// Nodes are stored along-major: k = j * ni + i, with i across the thickness
/// and j along the casting direction.
struct StencilView {
  int ni = 0;
  int nj = 0;
  std::span<const double> T;       // ni*nj, K
  std::span<const double> H;       // ni*nj, J/m^3
  std::span<const double> lambda;  // ni*nj, W/(m K)
  std::span<const double> g_across;  // (ni-1)*nj: face area / node distance, face (i+1/2, j)
  std::span<const double> g_along;   // ni*(nj-1): face (i, j+1/2)
  std::span<const double> flow;      // ni: volumetric flow through along-faces [m^2/s per unit width]
  std::span<const double> inflow_H;  // ni: enthalpy carried in at j = -1/2
  std::span<const double> volume;    // ni*nj
  std::span<const double> source;    // ni*nj: boundary heat input [W per unit width]
  std::span<const std::uint8_t> fixed;  // optional ni*nj; nonzero = Dirichlet node
};

namespace serial {
/// Reference implementation.
void explicit_update(const StencilView& v, double dt, std::span<double> H_out);
}  // namespace serial

namespace omp {
/// Same arithmetic per node as serial::explicit_update, parallel over j.
void explicit_update(const StencilView& v, double dt, std::span<double> H_out);
}  // namespace omp

enum class Backend { serial, openmp };

inline void explicit_update(Backend b, const StencilView& v, double dt, std::span<double> H_out) {
  if (b == Backend::openmp)
    omp::explicit_update(v, dt, H_out);
  else
    serial::explicit_update(v, dt, H_out);
}

/// Net heat rate into node k (W per unit width); shared by both backends.
inline double node_rate(const StencilView& v, int i, int j) {
  const int ni = v.ni;
  const std::size_t k = static_cast<std::size_t>(j) * ni + i;
  double acc = v.source[k];
  const double t = v.T[k];
  const double lam = v.lambda[k];
  if (i > 0) {
    const std::size_t f = static_cast<std::size_t>(j) * (ni - 1) + (i - 1);
    acc += v.g_across[f] * 0.5 * (lam + v.lambda[k - 1]) * (v.T[k - 1] - t);
  }
  if (i < ni - 1) {
    const std::size_t f = static_cast<std::size_t>(j) * (ni - 1) + i;
    acc += v.g_across[f] * 0.5 * (lam + v.lambda[k + 1]) * (v.T[k + 1] - t);
  }
  if (j > 0) {
    const std::size_t f = static_cast<std::size_t>(j - 1) * ni + i;
    acc += v.g_along[f] * 0.5 * (lam + v.lambda[k - ni]) * (v.T[k - ni] - t);
  }
  if (j < v.nj - 1) {
    const std::size_t f = static_cast<std::size_t>(j) * ni + i;
    acc += v.g_along[f] * 0.5 * (lam + v.lambda[k + ni]) * (v.T[k + ni] - t);
  }
  const double upstream = j > 0 ? v.H[k - ni] : v.inflow_H[i];
  acc += v.flow[i] * (upstream - v.H[k]);
  return acc;
}

}  // namespace ccm::kernels
