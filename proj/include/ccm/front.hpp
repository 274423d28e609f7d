#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ccm/material.hpp"
#include "ccm/thermal_block.hpp"

namespace ccm {

/// Which crossings of the T_kr isotherm to look for along each across-line.
enum class FrontScan {
  from_low,   // first crossing walking up from i = 0
  from_high,  // first crossing walking down from i = ni-1
  both,       // one from each face (two fronts around a liquid core)
};

/// One front location on an across-line with its Stefan balance.
struct FrontPoint {
  double position = 0.0;      // across coordinate of the isotherm (x, r or z)
  double solid_flux = 0.0;    // lambda dT/dn on the solid side, n into the liquid
  double liquid_flux = 0.0;   // lambda dT/dn on the liquid side
  double latent_flux = 0.0;   // mu rho(T_kr) * normal speed of solidification
  double residual = 0.0;      // solid_flux - liquid_flux - latent_flux
  bool has_velocity = false;  // false until a previous extraction is supplied
};

struct FrontSample {
  double coord = 0.0;  // along coordinate (z, phi or x)
  std::optional<FrontPoint> low;   // front reached from the i = 0 face
  std::optional<FrontPoint> high;  // front reached from the i = ni-1 face
};

struct PhaseFront {
  std::string section;
  double time = 0.0;
  std::vector<FrontSample> samples;

  /// False when the field is entirely solid or entirely liquid.
  bool has_front() const;
  /// Mean |residual| / max(|solid_flux|, |liquid_flux|) over points with a velocity.
  double mean_relative_residual() const;
};

/// Linear-interpolation crossing of `level` between consecutive entries, scanning
/// in the given direction; nullopt when there is none.
std::optional<double> locate_isotherm(std::span<const double> coords, std::span<const double> values,
                                      double level, bool from_low);

/// Locates the T_kr isotherm on every across-line of the block. When
/// `previous` is given, front speed uses the difference between the two
/// extractions plus the advective term u * d(xi)/d(along).
PhaseFront extract_front(const ThermalBlock& field, const MaterialProperties& material, FrontScan scan,
                         double time, const PhaseFront* previous = nullptr);

}  // namespace ccm
