#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "ccm/kernels.hpp"

using namespace ccm::kernels;

namespace {

struct RandomStencil {
  int ni, nj;
  std::vector<double> T, H, lambda, g_across, g_along, flow, inflow_H, volume, source;
  std::vector<std::uint8_t> fixed;

  RandomStencil(int ni_, int nj_, std::uint64_t seed, bool with_flow) : ni(ni_), nj(nj_) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const std::size_t n = static_cast<std::size_t>(ni) * nj;
    for (std::size_t k = 0; k < n; ++k) {
      T.push_back(300.0 + 1500.0 * u(rng));
      H.push_back(5e6 * T.back());
      lambda.push_back(20.0 + 30.0 * u(rng));
      volume.push_back(1e-4 * (0.5 + u(rng)));
      source.push_back(with_flow ? 1e3 * (u(rng) - 0.5) : 0.0);
      fixed.push_back(with_flow && u(rng) < 0.05 ? 1 : 0);
    }
    for (int k = 0; k < (ni - 1) * nj; ++k) g_across.push_back(0.5 + u(rng));
    for (int k = 0; k < ni * (nj - 1); ++k) g_along.push_back(0.5 + u(rng));
    for (int i = 0; i < ni; ++i) {
      flow.push_back(with_flow ? 1e-5 * u(rng) : 0.0);
      inflow_H.push_back(5e6 * 1800.0);
    }
  }

  StencilView view() const {
    return {ni, nj, T, H, lambda, g_across, g_along, flow, inflow_H, volume, source, fixed};
  }
};

}  // namespace

TEST_SUITE("kernels") {
  TEST_CASE("serial and openmp updates are bitwise identical") {
    for (auto [ni, nj] : {std::pair{3, 1}, std::pair{21, 40}, std::pair{141, 121}, std::pair{64, 7}}) {
      const RandomStencil s(ni, nj, 11u * ni + nj, true);
      std::vector<double> a(s.H.size()), b(s.H.size());
      serial::explicit_update(s.view(), 0.05, a);
      omp::explicit_update(s.view(), 0.05, b);
      for (std::size_t k = 0; k < a.size(); ++k) REQUIRE(a[k] == b[k]);
    }
  }

  TEST_CASE("fixed nodes keep their enthalpy") {
    const RandomStencil s(9, 9, 5, true);
    std::vector<double> out(s.H.size());
    serial::explicit_update(s.view(), 0.05, out);
    for (std::size_t k = 0; k < out.size(); ++k)
      if (s.fixed[k]) CHECK(out[k] == s.H[k]);
  }

  TEST_CASE("uniform field without sources is a fixed point") {
    RandomStencil s(12, 10, 3, false);
    std::fill(s.T.begin(), s.T.end(), 900.0);
    std::fill(s.H.begin(), s.H.end(), 4.5e9);
    std::vector<double> out(s.H.size());
    serial::explicit_update(s.view(), 0.1, out);
    for (std::size_t k = 0; k < out.size(); ++k) CHECK(out[k] == s.H[k]);
  }

  TEST_CASE("interior exchange conserves energy") {
    const RandomStencil s(15, 12, 9, false);
    std::vector<double> out(s.H.size());
    serial::explicit_update(s.view(), 0.02, out);
    double before = 0.0, after = 0.0;
    for (std::size_t k = 0; k < out.size(); ++k) {
      before += s.volume[k] * s.H[k];
      after += s.volume[k] * out[k];
    }
    CHECK(after == doctest::Approx(before).epsilon(1e-14));
  }

  TEST_CASE("node rate of two nodes is antisymmetric") {
    RandomStencil s(2, 1, 1, false);
    const StencilView v = s.view();
    CHECK(node_rate(v, 0, 0) == doctest::Approx(-node_rate(v, 1, 0)));
    CHECK(node_rate(v, 0, 0) == doctest::Approx(s.g_across[0] * 0.5 * (s.lambda[0] + s.lambda[1]) * (s.T[1] - s.T[0])));
  }
}
