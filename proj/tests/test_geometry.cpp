#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "ccm/errors.hpp"
#include "ccm/geometry.hpp"

using namespace ccm;

namespace {

MachineLayout layout() {
  MachineLayout l;
  CurvilinearSection s;
  s.name = "curv1";
  s.nozzles = {0.1, 0.3, 0.5};
  s.w = 0.05;
  l.curvilinear.push_back(s);
  RectilinearSection r;
  r.nozzles = {0.5, 1.5};
  l.rectilinear = r;
  return l;
}

GridSpec spec() {
  GridSpec g;
  g.along_nodes = {121, 41};
  return g;
}

}  // namespace

TEST_SUITE("geometry") {
  TEST_CASE("no nozzles puts every node in K") {
    MachineLayout l = layout();
    l.curvilinear[0].nozzles.clear();
    const MachineGrids g = build_grids(l, spec());
    const SectionGrid& s = g.section("curv1");
    CHECK(s.count_in(Membership::B) == 0);
    CHECK(s.count_in(Membership::K) == s.surface.size());
  }

  TEST_CASE("footprint membership is inclusive") {
    const std::vector<double> axis{0.0};
    CHECK(classify(axis, 0.05, 0.02) == Membership::B);
    CHECK(classify(axis, 0.05, 0.05) == Membership::B);
    CHECK(classify(axis, 0.05, -0.05) == Membership::B);
    CHECK(classify(axis, 0.05, 0.0500001) == Membership::K);
  }

  TEST_CASE("nearest nozzle offset") {
    const std::vector<double> one{0.0};
    CHECK(nearest_nozzle_offset(one, 0.05, 0.0) == 0.0);
    CHECK(nearest_nozzle_offset(one, 0.05, 0.05) == doctest::Approx(0.05));
    const std::vector<double> two{0.0, 0.2};
    CHECK(nearest_nozzle_offset(two, 0.1, 0.09) == doctest::Approx(0.09));
    CHECK(nearest_nozzle_offset(two, 0.1, 0.11) == doctest::Approx(-0.09));
    CHECK_THROWS_AS(nearest_nozzle_offset(one, 0.05, 0.2), std::logic_error);
  }

  TEST_CASE("offset is odd about each axis") {
    const std::vector<double> axes{0.1, 0.3, 0.5};
    for (double a : axes)
      for (double y : {0.0, 0.01, 0.033, 0.049}) {
        const double up = nearest_nozzle_offset(axes, 0.05, a + y);
        const double down = nearest_nozzle_offset(axes, 0.05, a - y);
        CHECK(up == doctest::Approx(-down));
        CHECK(std::abs(up) == doctest::Approx(y));
      }
  }

  TEST_CASE("K and B partition the surface") {
    const MachineGrids g = build_grids(layout(), spec());
    for (const auto& s : g.sections) {
      CHECK(s.count_in(Membership::K) + s.count_in(Membership::B) == s.surface.size());
      for (const auto& n : s.surface) {
        CHECK(n.membership == classify(s.nozzles, s.w, n.coord));
        if (n.membership == Membership::B) CHECK(std::abs(n.offset) <= s.w + 1e-15);
      }
    }
  }

  TEST_CASE("grid coordinates") {
    const MachineLayout l = layout();
    const GridSpec gs = spec();
    const MachineGrids g = build_grids(l, gs);
    const SectionGrid& c = g.section("curv1");
    REQUIRE(c.across.size() == static_cast<std::size_t>(gs.thickness_nodes));
    CHECK(c.across.front() == doctest::Approx(l.curvilinear[0].r_m));
    CHECK(c.across.back() == doctest::Approx(l.curvilinear[0].r_m + 2 * l.mould.l));
    CHECK(c.along.front() == 0.0);
    CHECK(c.along.back() == doctest::Approx(l.curvilinear[0].phi_span));
    CHECK(c.surface.size() == c.along.size());
    CHECK(g.mould.x.size() == static_cast<std::size_t>(gs.half_nodes()));
    CHECK(g.mould.x.back() == doctest::Approx(l.mould.l));
    CHECK(g.mould.wall_z[g.mould.wall_offset] == doctest::Approx(0.0));
    CHECK_THROWS_AS(g.section("nope"), ConfigError);
  }

  TEST_CASE("stencil depth is enforced") {
    GridSpec gs = spec();
    gs.thickness_nodes = 3;
    CHECK_THROWS_AS(build_grids(layout(), gs), ConfigError);
    gs.thickness_nodes = 20;
    CHECK_THROWS_AS(build_grids(layout(), gs), ConfigError);
  }

  TEST_CASE("angular velocity from casting speed") {
    const CurvilinearSection& s = layout().curvilinear[0];
    CHECK(s.theta(0.02, 0.1) == doctest::Approx(0.02 / 4.1));
  }

  TEST_CASE("schedules interpolate and hold") {
    const Schedule s({{0.0, 1.0}, {10.0, 3.0}});
    CHECK(s(-5.0) == 1.0);
    CHECK(s(5.0) == doctest::Approx(2.0));
    CHECK(s(50.0) == 3.0);
  }
}
