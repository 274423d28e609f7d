#pragma once

#include <span>
#include <string>
#include <vector>

#include "ccm/geometry.hpp"

namespace ccm {

/// Nozzle-periodic CHTC: alpha_c + alpha_p (1 - y^2/w^2) inside each
/// footprint (y = offset from the nearest axis), alpha_c elsewhere.
/// All nozzles of a section share one parabola.
struct ChtcProfile {
  double alpha_c = 250.0;  // W/(m^2 K)
  double alpha_p = 750.0;  // W/(m^2 K)
  double w = 0.05;
  std::vector<double> nozzles;

  void validate() const;
  double alpha_at(double coord) const;
  double peak() const { return alpha_c + alpha_p; }
};

/// alpha_at over every surface node of a section grid.
std::vector<double> profile_vector(const ChtcProfile& profile, std::span<const SurfaceNode> surface);
std::vector<double> profile_vector(const ChtcProfile& profile, std::span<const double> coords);

/// Key-value block: section, alpha_c, alpha_p, w.
std::string serialize(const ChtcProfile& profile, const std::string& section);

}  // namespace ccm
