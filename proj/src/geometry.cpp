#include "ccm/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

#include "ccm/errors.hpp"

namespace ccm {

namespace {

void check_footprints(const std::string& who, std::vector<double> nozzles, double w, double lo,
                      double hi) {
  if (!(w > 0.0)) throw ConfigError(who + ": nozzle half-width w must be > 0");
  std::sort(nozzles.begin(), nozzles.end());
  for (std::size_t k = 0; k < nozzles.size(); ++k) {
    if (nozzles[k] - w < lo || nozzles[k] + w > hi)
      throw ConfigError(fmt::format("{}: footprint of nozzle at {} leaves the section", who, nozzles[k]));
    if (k > 0 && nozzles[k] - w <= nozzles[k - 1] + w)
      throw ConfigError(fmt::format("{}: footprints of nozzles at {} and {} overlap", who,
                                    nozzles[k - 1], nozzles[k]));
  }
}

std::vector<double> lattice(double lo, double hi, int n) {
  std::vector<double> v(n);
  for (int k = 0; k < n; ++k) v[k] = lo + (hi - lo) * k / (n - 1);
  v.back() = hi;
  return v;
}

}  // namespace

void MouldGeometry::validate() const {
  if (!(l > 0.0)) throw ConfigError("mould: l must be > 0");
  if (!(big_z > 0.0)) throw ConfigError("mould: Z must be > 0");
  if (!(delta > 0.0)) throw ConfigError("mould: air gap delta must be > 0");
  if (!(d > l + delta)) throw ConfigError("mould: wall coordinate d must exceed l + delta");
  if (!(z0 <= 0.0)) throw ConfigError("mould: wall top z0 must be at or above the meniscus (z0 <= 0)");
}

Schedule::Schedule(std::vector<std::pair<double, double>> points)
    : points_(std::move(points)) {
  std::sort(points_.begin(), points_.end());
}

double Schedule::operator()(double tau) const {
  if (points_.empty()) return 0.0;
  if (tau <= points_.front().first) return points_.front().second;
  if (tau >= points_.back().first) return points_.back().second;
  auto it = std::upper_bound(points_.begin(), points_.end(), std::make_pair(tau, -1e300));
  const auto& b = *it;
  const auto& a = *(it - 1);
  return a.second + (tau - a.first) / (b.first - a.first) * (b.second - a.second);
}

void CurvilinearSection::validate() const {
  if (!(r_m > 0.0)) throw ConfigError(name + ": r_m must be > 0");
  if (!(phi_span > 0.0)) throw ConfigError(name + ": phi_span must be > 0");
  check_footprints(name, nozzles, w, 0.0, phi_span);
}

void RectilinearSection::validate() const {
  if (!(x_f > 0.0)) throw ConfigError(name + ": x_f must be > 0");
  check_footprints(name, nozzles, w, 0.0, x_f);
}

void MachineLayout::validate() const {
  mould.validate();
  for (const auto& s : curvilinear) s.validate();
  if (rectilinear) rectilinear->validate();
}

void GridSpec::validate() const {
  if (thickness_nodes < 5 || thickness_nodes % 2 == 0)
    throw ConfigError(fmt::format(
        "grid: thickness_nodes = {} must be odd and >= 5 (three nodes across the half-thickness)",
        thickness_nodes));
  if (mould_nodes < 3) throw ConfigError("grid: mould_nodes must be >= 3");
  if (wall_nodes < 2) throw ConfigError("grid: wall_nodes must be >= 2");
  for (int n : along_nodes)
    if (n < 3) throw ConfigError("grid: along_nodes entries must be >= 3");
  if (!(dt > 0.0)) throw ConfigError("grid: dt must be > 0");
}

std::size_t SectionGrid::count_in(Membership m) const {
  return static_cast<std::size_t>(
      std::count_if(surface.begin(), surface.end(), [m](const SurfaceNode& s) { return s.membership == m; }));
}

const SectionGrid& MachineGrids::section(const std::string& name) const {
  for (const auto& s : sections)
    if (s.name == name) return s;
  throw ConfigError("unknown section '" + name + "'");
}

Membership classify(std::span<const double> nozzles, double w, double coord) {
  for (double axis : nozzles)
    if (std::abs(coord - axis) <= w) return Membership::B;
  return Membership::K;
}

double nearest_nozzle_offset(std::span<const double> nozzles, double w, double coord) {
  double best = std::numeric_limits<double>::infinity();
  for (double axis : nozzles) {
    const double y = coord - axis;
    if (std::abs(y) < std::abs(best)) best = y;
  }
  if (!(std::abs(best) <= w))
    throw std::logic_error(fmt::format("nearest_nozzle_offset: coordinate {} is outside every footprint", coord));
  return best;
}

MachineGrids build_grids(const MachineLayout& layout, const GridSpec& spec) {
  layout.validate();
  spec.validate();
  const MouldGeometry& m = layout.mould;
  const std::size_t n_sections = layout.curvilinear.size() + (layout.rectilinear ? 1 : 0);
  if (spec.along_nodes.size() != n_sections)
    throw ConfigError(fmt::format("grid: along_nodes has {} entries for {} sections", spec.along_nodes.size(),
                                  n_sections));

  MachineGrids g;
  g.mould.x = lattice(0.0, m.l, spec.half_nodes());
  g.mould.z = lattice(0.0, m.big_z, spec.mould_nodes);
  g.mould.wall_x = lattice(m.l + m.delta, m.d, spec.wall_nodes);
  const double dz = m.big_z / (spec.mould_nodes - 1);
  const int above = static_cast<int>(std::lround(-m.z0 / dz));
  g.mould.wall_offset = above;
  for (int j = -above; j < spec.mould_nodes; ++j) g.mould.wall_z.push_back(j < 0 ? j * dz : g.mould.z[j]);

  const double thick = 2.0 * m.l;
  auto make_surface = [](SectionGrid& sg) {
    for (double c : sg.along) {
      SurfaceNode s;
      s.coord = c;
      s.membership = classify(sg.nozzles, sg.w, c);
      if (s.membership == Membership::B) s.offset = nearest_nozzle_offset(sg.nozzles, sg.w, c);
      sg.surface.push_back(s);
    }
  };
  std::size_t k = 0;
  for (const auto& c : layout.curvilinear) {
    SectionGrid sg;
    sg.name = c.name;
    sg.kind = SectionKind::curvilinear;
    sg.across = lattice(c.r_m, c.r_m + thick, spec.thickness_nodes);
    sg.along = lattice(0.0, c.phi_span, spec.along_nodes[k++]);
    sg.nozzles = c.nozzles;
    sg.w = c.w;
    make_surface(sg);
    g.sections.push_back(std::move(sg));
  }
  if (layout.rectilinear) {
    const auto& r = *layout.rectilinear;
    SectionGrid sg;
    sg.name = r.name;
    sg.kind = SectionKind::rectilinear;
    sg.across = lattice(r.z_p, r.z_p + thick, spec.thickness_nodes);
    sg.along = lattice(0.0, r.x_f, spec.along_nodes[k++]);
    sg.nozzles = r.nozzles;
    sg.w = r.w;
    make_surface(sg);
    g.sections.push_back(std::move(sg));
  }
  return g;
}

}  // namespace ccm
