#include "ccm/chtc.hpp"

#include <cmath>

#include <fmt/format.h>

#include "ccm/errors.hpp"

namespace ccm {

void ChtcProfile::validate() const {
  if (!(alpha_c > 0.0)) throw ConfigError(fmt::format("chtc: alpha_c = {} must be > 0", alpha_c));
  if (!(alpha_p >= 0.0)) throw ConfigError(fmt::format("chtc: alpha_p = {} must be >= 0", alpha_p));
  if (!(w > 0.0)) throw ConfigError("chtc: w must be > 0");
}

double ChtcProfile::alpha_at(double coord) const {
  if (classify(nozzles, w, coord) == Membership::K) return alpha_c;
  const double y = nearest_nozzle_offset(nozzles, w, coord);
  return alpha_c + alpha_p * (1.0 - (y * y) / (w * w));
}

std::vector<double> profile_vector(const ChtcProfile& profile, std::span<const SurfaceNode> surface) {
  std::vector<double> out;
  out.reserve(surface.size());
  for (const auto& s : surface) {
    if (s.membership == Membership::K) {
      out.push_back(profile.alpha_c);
    } else {
      const double u = s.offset / profile.w;
      out.push_back(profile.alpha_c + profile.alpha_p * (1.0 - u * u));
    }
  }
  return out;
}

std::vector<double> profile_vector(const ChtcProfile& profile, std::span<const double> coords) {
  std::vector<double> out;
  out.reserve(coords.size());
  for (double c : coords) out.push_back(profile.alpha_at(c));
  return out;
}

std::string serialize(const ChtcProfile& profile, const std::string& section) {
  return fmt::format("section: {}\nalpha_c: {:.10g}\nalpha_p: {:.10g}\nw: {:.10g}\n", section, profile.alpha_c,
                     profile.alpha_p, profile.w);
}

}  // namespace ccm
