#include <doctest.h>

#include <cmath>
#include <memory>
#include <vector>

#include "ccm/front.hpp"
#include "ccm/material.hpp"
#include "ccm/thermal_block.hpp"
#include "oracles.hpp"

using namespace ccm;

namespace {

std::vector<double> lattice(double lo, double hi, int n) {
  std::vector<double> v(n);
  for (int k = 0; k < n; ++k) v[k] = lo + (hi - lo) * k / (n - 1);
  return v;
}

}  // namespace

TEST_SUITE("front") {
  TEST_CASE("fully solid field has no front") {
    auto m = std::make_shared<const MaterialProperties>(st40());
    ThermalBlock b = ThermalBlock::cartesian("solid", lattice(0.0, 0.1, 11), lattice(0.0, 1.0, 4), ThermalLaw::steel(m));
    b.set_uniform(1200.0);
    const PhaseFront f = extract_front(b, *m, FrontScan::both, 0.0);
    CHECK_FALSE(f.has_front());
    CHECK(f.samples.size() == 4);
    b.set_uniform(1850.0);
    CHECK_FALSE(extract_front(b, *m, FrontScan::both, 0.0).has_front());
  }

  TEST_CASE("linear profile is located by exact interpolation") {
    const std::vector<double> x = lattice(0.0, 1.0, 11);
    std::vector<double> t;
    for (double xi : x) t.push_back(1700.0 + 100.0 * xi);
    const auto pos = locate_isotherm(x, t, 1744.0, true);
    REQUIRE(pos);
    CHECK(*pos == doctest::Approx(0.44));
    CHECK_FALSE(locate_isotherm(x, t, 1744.0, false));
    CHECK_FALSE(locate_isotherm(x, t, 1650.0, true));
  }

  TEST_CASE("shell from both faces around a liquid core") {
    auto m = std::make_shared<const MaterialProperties>(st40());
    const std::vector<double> x = lattice(0.0, 0.2, 21);
    ThermalBlock b = ThermalBlock::cartesian("core", x, {0.0, 1.0}, ThermalLaw::steel(m));
    std::vector<double> t;
    for (int j = 0; j < 2; ++j)
      for (double xi : x) t.push_back(1200.0 + 600.0 * (1.0 - std::pow((xi - 0.1) / 0.1, 2)));
    b.set_temperature(t);
    const PhaseFront f = extract_front(b, *m, FrontScan::both, 0.0);
    REQUIRE(f.samples[0].low);
    REQUIRE(f.samples[0].high);
    CHECK(f.samples[0].low->position + f.samples[0].high->position == doctest::Approx(0.2));
    CHECK(f.samples[0].low->solid_flux > 0.0);
  }

  TEST_CASE("Stefan residual of the Neumann solution") {
    const oracle::NeumannCase nc;
    const double length = 0.25, t_end = 600.0, window = 60.0;
    const double gradient = (nc.t_melt - nc.t_wall) / oracle::neumann_front(nc, t_end);
    for (int n : {161, 241, 321}) {
      const auto m = oracle::neumann_material(nc, gradient * length / (n - 1));
      ThermalBlock b = oracle::neumann_slab(nc, m, n, length);
      double t = 0.0;
      auto advance = [&](double to) {
        while (to - t > 1e-12) {
          b.begin_step();
          const double dt = std::min(0.95 * b.stable_dt(), to - t);
          b.step(dt, kernels::Backend::serial);
          t += dt;
        }
      };
      advance(t_end - window);
      const PhaseFront before = extract_front(b, *m, FrontScan::from_low, t);
      advance(t_end);
      const PhaseFront after = extract_front(b, *m, FrontScan::from_low, t, &before);
      REQUIRE(after.samples[0].low);
      CHECK(after.samples[0].low->has_velocity);
      CHECK(after.mean_relative_residual() <= 0.05);
      CHECK(after.samples[0].low->position == doctest::Approx(oracle::neumann_front(nc, t_end)).epsilon(0.03));
    }
  }

  TEST_CASE("similarity root satisfies the interface balance") {
    const oracle::NeumannCase nc;
    const double t = 300.0;
    const double kappa = nc.lambda_s / (nc.rho * nc.c);
    const double lam = oracle::neumann_root(nc);
    const double g_s = (nc.t_melt - nc.t_wall) * std::exp(-lam * lam) / (std::erf(lam) * std::sqrt(M_PI * kappa * t));
    const double g_l = (nc.t_init - nc.t_melt) * std::exp(-lam * lam) / (std::erfc(lam) * std::sqrt(M_PI * kappa * t));
    const double speed = lam * std::sqrt(kappa / t);
    CHECK(nc.lambda_s * g_s - nc.lambda_l * g_l == doctest::Approx(nc.rho * nc.latent * speed).epsilon(1e-9));
  }
}
