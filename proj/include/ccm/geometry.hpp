#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace ccm {

/// Mould region. The ingot occupies 0 <= x <= l (x = 0 is the symmetry
/// plane), the copper wall l + delta <= x <= d, and z runs downward from the
/// meniscus (z = 0) to the mould exit (z = big_z); the wall starts at z0 < 0.
struct MouldGeometry {
  double l = 0.1;
  double big_z = 0.8;
  double d = 0.1252;
  double z0 = -0.1;
  double delta = 2e-4;

  void validate() const;
};

/// Time series f(tau): piecewise-linear, held constant outside the given
/// points (water discharge, casting speed, inlet water temperature).
class Schedule {
 public:
  Schedule() = default;
  explicit Schedule(std::vector<std::pair<double, double>> points);
  static Schedule constant(double value) { return Schedule({{0.0, value}}); }
  double operator()(double tau) const;
  const std::vector<std::pair<double, double>>& points() const { return points_; }

 private:
  std::vector<std::pair<double, double>> points_;
};

/// Arc section: r_m <= r <= r_m + 2l, 0 <= phi <= phi_span. Nozzle axes and
/// the footprint half-width w are angles in radians.
struct CurvilinearSection {
  std::string name;
  int index_m = 1;
  double r_m = 4.0;
  double phi_span = 0.6;
  std::vector<double> nozzles;
  double w = 0.05;
  Schedule g_m;

  /// Angular withdrawal velocity from the casting speed at mid-thickness.
  double theta(double v, double l) const { return v / (r_m + l); }
  void validate() const;
};

/// Straight section: 0 <= x <= x_f along the casting direction,
/// z_p <= z <= z_p + 2l across. Nozzle axes and w are lengths in metres.
struct RectilinearSection {
  std::string name = "rect";
  double z_p = 0.0;
  double x_f = 4.0;
  std::vector<double> nozzles;
  double w = 0.2;
  Schedule g_m;

  void validate() const;
};

struct MachineLayout {
  MouldGeometry mould;
  std::vector<CurvilinearSection> curvilinear;  // casting order
  std::optional<RectilinearSection> rectilinear;

  void validate() const;
};

struct GridSpec {
  int thickness_nodes = 21;   // across the full thickness 2l (odd)
  int mould_nodes = 41;       // along z in the mould, 0..Z
  int wall_nodes = 6;         // across the copper wall
  std::vector<int> along_nodes;  // per secondary-cooling section, casting order
  double dt = 1.0;            // macro step [s]; regions sub-cycle inside it

  /// Radial / transverse step q.
  double q(double l) const { return 2.0 * l / (thickness_nodes - 1); }
  int half_nodes() const { return (thickness_nodes - 1) / 2 + 1; }
  void validate() const;
};

enum class Membership : std::uint8_t { K, B };

/// Surface node: K when the CHTC is the baseline constant, B when it lies
/// inside a nozzle footprint (|coord - axis| <= w, inclusive).
struct SurfaceNode {
  double coord = 0.0;
  Membership membership = Membership::K;
  double offset = 0.0;  // signed distance to the nearest nozzle axis (B only)
};

enum class SectionKind { curvilinear, rectilinear };

struct SectionGrid {
  std::string name;
  SectionKind kind = SectionKind::curvilinear;
  std::vector<double> across;  // r (curvilinear) or z (rectilinear) node coordinates
  std::vector<double> along;   // phi or x node coordinates
  std::vector<SurfaceNode> surface;  // same classification on both faces
  std::vector<double> nozzles;
  double w = 0.0;

  std::size_t count_in(Membership m) const;
};

struct MouldGrid {
  std::vector<double> x;       // ingot, 0..l
  std::vector<double> z;       // ingot, 0..Z
  std::vector<double> wall_x;  // l+delta..d
  std::vector<double> wall_z;  // z0..Z (z0 snapped to the z lattice)
  int wall_offset = 0;         // wall_z[wall_offset] == 0
};

struct MachineGrids {
  MouldGrid mould;
  std::vector<SectionGrid> sections;  // curvilinear first, then rectilinear

  const SectionGrid& section(const std::string& name) const;
};

MachineGrids build_grids(const MachineLayout& layout, const GridSpec& spec);

Membership classify(std::span<const double> nozzles, double w, double coord);

/// Signed offset of coord from the nearest nozzle axis; y in [-w, w].
/// Throws std::logic_error when coord is outside every footprint.
double nearest_nozzle_offset(std::span<const double> nozzles, double w, double coord);

}  // namespace ccm
