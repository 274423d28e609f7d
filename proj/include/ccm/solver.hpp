#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "ccm/chtc.hpp"
#include "ccm/front.hpp"
#include "ccm/geometry.hpp"
#include "ccm/kernels.hpp"
#include "ccm/material.hpp"
#include "ccm/thermal_block.hpp"

namespace ccm {

struct WallProperties {
  double c = 385.0;       // J/(kg K), copper
  double rho = 8900.0;    // kg/m^3
  double lambda = 350.0;  // W/(m K)
};

/// Mould-side exchange coefficients. Radiation terms of the gap and the
/// exposed wall face use (T/100)^4.
struct MouldEnvironment {
  double lambda_gz = 0.2;  // gap gas conduction, W/(m K)
  double sigma_n = 4.0;    // gap radiation coefficient, W/m^2 per (K/100)^4
  double c_n = 0.5;        // exposed wall face radiation, W/m^2 per (K/100)^4
  double alpha_2 = 20.0;   // wall bottom z = Z
  double alpha_3 = 20.0;   // wall top z = z0
  double alpha_4 = 20.0;   // inner wall face above the meniscus
  double t_os1 = 300.0, t_os2 = 300.0, t_os3 = 300.0;
};

/// Cooling-water channel behind the wall. Quantities are per unit slab width.
struct WaterChannel {
  double c_w = 4.18e6;    // volumetric heat capacity, J/(m^3 K)
  double s_ch = 0.005;    // channel cross-section per unit width, m
  double v_water = 8.0;   // m/s
  double p_i = 1.0;       // interior wall perimeter per unit width
  double p_e = 1.0;       // exterior wall perimeter per unit width
  double alpha_1 = 25000.0;  // wall -> water, W/(m^2 K)
  double alpha_e = 0.0;      // water -> external wall, W/(m^2 K)
  double t_e = 300.0;        // external wall temperature, K
  Schedule inlet = Schedule::constant(303.0);  // T_water1(tau) at z = Z
  double initial = 303.0;                      // T_water0(z)

  void validate() const;
};

/// Water temperature at the wall nodes zw (ascending, inlet at zw.back()) at
/// time tau for the given wall face temperatures, integrated exactly along
/// the characteristics with the wall held piecewise constant per node cell.
void solve_water_channel(const WaterChannel& w, std::span<const double> zw, std::span<const double> wall_t, double tau,
                         std::span<double> out);

/// Radiation + convection environment of one strand face (no /100 scaling).
struct FaceEnvironment {
  double t_env = 300.0;   // K
  double c_rad = 4.5e-8;  // W/(m^2 K^4)
};

/// Adds the convective + radiative exchange of one strand face to the block
/// sources: q = alpha (T - T_env) + c_rad (T^4 - T_env^4) leaving the face.
enum class Face { inner, outer };
void add_face_exchange(ThermalBlock& block, Face face, std::span<const double> alpha, const FaceEnvironment& env);

struct SectionSetup {
  FaceEnvironment inner;  // r = r_m, or z = z_p
  FaceEnvironment outer;  // r = r_m + 2l, or z = z_p + 2l
  ChtcProfile alpha_inner;
  ChtcProfile alpha_outer;
};

struct MachineConfig {
  MachineLayout layout;
  GridSpec grid;
  std::shared_ptr<const MaterialProperties> material;
  WallProperties wall;
  MouldEnvironment mould_env;
  WaterChannel water;
  std::vector<SectionSetup> sections;  // same order as the section grids
  Schedule casting_speed = Schedule::constant(1.0 / 60.0);  // m/s
  double pour_temperature = 1800.0;
  double initial_strand_temperature = 1800.0;
  double initial_wall_temperature = 303.0;
  kernels::Backend backend = kernels::Backend::serial;

  void validate() const;
};

/// Surface coordinate paired with temperature, ordered along the casting direction.
struct SurfaceSample {
  double coord;
  double t;
};

struct EnergyAudit {
  std::string block;
  double enthalpy_change = 0.0;  // J per unit width
  double boundary_energy = 0.0;  // J per unit width
  double gross_energy = 0.0;
  double relative_error() const;
};

/// Coupled forward model: mould ingot + wall + water channel, then the
/// curvilinear and rectilinear secondary-cooling sections in casting order.
/// Single-threaded by contract (the OpenMP backend parallelises inside a
/// kernel only); distinct instances share nothing mutable.
class Machine {
 public:
  explicit Machine(MachineConfig config);

  double time() const { return time_; }
  const MachineConfig& config() const { return config_; }
  const MachineGrids& grids() const { return grids_; }
  const MaterialProperties& material() const { return *config_.material; }

  /// One explicit step of ingot and wall with the gap flux applied
  /// identically to both sides. Throws StabilityError when dt is too large.
  void step_mould(double dt);
  /// Re-solves the water channel for the current wall temperatures.
  void step_water(double dt);
  void step_curvilinear(std::size_t k, double dt);
  void step_rectilinear(double dt);

  /// Advances every region by dt, sub-cycling each at its own stable step.
  void advance(double dt);
  /// Advances section k alone by dt with every upstream region frozen.
  /// Exact once upstream regions are steady; used by the operative tuner.
  void advance_section(std::size_t k, double dt);
  /// Advances to t_end in macro steps of grid.dt, calling `tap` every
  /// `sample_interval` seconds of model time (0 = never).
  void run_to_time(double t_end, double sample_interval = 0.0,
                   const std::function<void(const Machine&)>& tap = {});

  double stable_dt_mould();
  double stable_dt_section(std::size_t k);

  const ThermalBlock& ingot() const { return ingot_; }
  const ThermalBlock& wall() const { return wall_; }
  const ThermalBlock& section_block(std::size_t k) const { return sections_[k]; }
  const ThermalBlock& section_block(const std::string& name) const;
  std::size_t section_index(const std::string& name) const;
  std::size_t section_count() const { return sections_.size(); }
  std::span<const double> water_temperature() const { return water_; }

  void set_profile(const std::string& section, Face face, const ChtcProfile& profile);
  const ChtcProfile& profile(const std::string& section, Face face) const;
  /// Replaces only alpha_c of a face profile (operative tuning).
  void set_alpha_c(const std::string& section, Face face, double alpha_c);

  std::vector<SurfaceSample> surface_temperature_profile(const std::string& section, Face face = Face::inner) const;
  /// Temperature profile entering a section (its upstream outflow mapped
  /// onto the section's across nodes).
  std::vector<double> inflow_profile(std::size_t k) const;

  PhaseFront front(const std::string& section, const PhaseFront* previous = nullptr) const;

  /// Enthalpy audit since the last reset, one entry per block.
  std::vector<EnergyAudit> energy_audit() const;
  void reset_energy_audit();

  double lower_bound() const { return lower_bound_; }
  double upper_bound() const { return upper_bound_; }
  /// Count of node updates that left [lower_bound, upper_bound].
  long max_principle_violations() const { return bound_violations_; }
  double worst_bound_excess() const { return worst_excess_; }
  /// Steps in which a node near T_kr changed by more than dt_smear / 2.
  long smear_warnings() const { return smear_warnings_; }

  void write_field_csv(std::ostream& out) const;
  void write_front_csv(std::ostream& out) const;

 private:
  struct SectionState {
    std::vector<double> alpha_inner, alpha_outer;
  };

  void assemble_mould();
  void assemble_section(std::size_t k);
  void step_section(std::size_t k, double dt);
  void after_step(const ThermalBlock& b);
  double section_velocity(std::size_t k) const;
  void note_energy(std::size_t slot, const ThermalBlock& b);

  MachineConfig config_;
  MachineGrids grids_;
  ThermalBlock ingot_;
  ThermalBlock wall_;
  std::vector<ThermalBlock> sections_;
  std::vector<SectionState> section_alpha_;
  std::vector<double> water_;
  double time_ = 0.0;
  double lower_bound_ = 0.0, upper_bound_ = 0.0;
  long bound_violations_ = 0;
  double worst_excess_ = 0.0;
  long smear_warnings_ = 0;
  bool smear_reported_ = false;
  std::vector<double> audit_h0_, audit_boundary_, audit_gross_;
};

}  // namespace ccm
