#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ccm/kernels.hpp"
#include "ccm/material.hpp"

namespace ccm {

/// Enthalpy/temperature/conductivity law of one medium: the steel tables
/// with their smeared latent heat, or constant properties (mould copper).
class ThermalLaw {
 public:
  static ThermalLaw steel(std::shared_ptr<const MaterialProperties> m);
  static ThermalLaw constant(double c, double rho, double lambda);

  double enthalpy(double t) const;
  double temperature(double h) const;
  double conductivity(double t) const;
  double min_capacity() const;
  const MaterialProperties* material() const { return material_.get(); }

 private:
  std::shared_ptr<const MaterialProperties> material_;
  std::shared_ptr<const EnthalpyCurve> curve_;
  double c_ = 0.0, rho_ = 0.0, lambda_ = 0.0;
};

enum class Side { across_low, across_high, along_low, along_high };

/// One structured finite-volume block (vertex-centred, half cells on the
/// boundary) storing volumetric enthalpy as the conserved state. The block
/// knows its geometry and interior fluxes; boundary heat input is supplied
/// per step through source() by the owning region.
class ThermalBlock {
 public:
  static ThermalBlock cartesian(std::string name, std::vector<double> across, std::vector<double> along,
                                ThermalLaw law);
  /// across = radii, along = angles [rad].
  static ThermalBlock polar(std::string name, std::vector<double> radii, std::vector<double> angles,
                            ThermalLaw law);

  const std::string& name() const { return name_; }
  bool is_polar() const { return polar_; }
  int ni() const { return ni_; }
  int nj() const { return nj_; }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * ni_ + i; }
  std::span<const double> across() const { return across_; }
  std::span<const double> along() const { return along_; }
  const ThermalLaw& law() const { return law_; }

  std::span<const double> T() const { return T_; }
  std::span<const double> H() const { return H_; }
  std::span<const double> lambda() const { return lambda_; }
  double T(int i, int j) const { return T_[index(i, j)]; }
  double volume(int i, int j) const { return volume_[index(i, j)]; }
  double face_area(Side side, int n) const;

  void set_uniform(double t);
  void set_temperature(std::span<const double> t);
  void set_fixed(int i, int j, bool fixed);

  /// Casting velocity: m/s for Cartesian blocks, angular rad/s for polar.
  void set_velocity(double u);
  double velocity() const { return velocity_; }
  void set_inflow_temperature(std::span<const double> t_in);
  std::span<const double> inflow_temperature() const { return inflow_T_; }

  /// Zeroed by begin_step(); regions add boundary heat input [W per unit width]
  /// and the linearised boundary conductance [W/K per unit width] per node.
  void begin_step();
  void add_boundary(std::size_t k, double heat, double conductance);
  std::span<const double> source() const { return source_; }

  /// Largest dt keeping every update a convex combination (safety 0.8; in the
  /// interior this is 0.4 c rho / lambda (1/dx^2 + 1/dz^2)^-1).
  double stable_dt() const;
  /// Advances one explicit step; throws StabilityError above stable_dt().
  void step(double dt, kernels::Backend backend);

  double total_enthalpy() const;
  /// Energy entering through boundaries and the inflow face over the last step.
  double last_boundary_energy() const { return last_boundary_energy_; }
  double last_gross_energy() const { return last_gross_energy_; }
  double max_last_change() const { return max_last_change_; }
  double max_last_change_near(double t_center, double band) const;

  kernels::StencilView view() const;

 private:
  ThermalBlock(std::string name, bool polar, std::vector<double> across, std::vector<double> along,
               ThermalLaw law);
  void refresh_derived(kernels::Backend backend);

  std::string name_;
  bool polar_ = false;
  int ni_ = 0, nj_ = 0;
  std::vector<double> across_, along_;
  ThermalLaw law_;
  std::vector<double> T_, H_, lambda_, H_next_, T_prev_;
  std::vector<double> volume_, g_across_, g_along_, flow_unit_, flow_;
  std::vector<double> across_area_low_, across_area_high_, along_area_;
  std::vector<double> inflow_T_, inflow_H_;
  std::vector<double> source_, boundary_g_;
  std::vector<std::uint8_t> fixed_;
  double velocity_ = 0.0;
  double last_boundary_energy_ = 0.0;
  double last_gross_energy_ = 0.0;
  double max_last_change_ = 0.0;
  mutable double stable_cache_ = -1.0;  // negative when stale
};

}  // namespace ccm
