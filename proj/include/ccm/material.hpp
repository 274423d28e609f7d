#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ccm/table.hpp"

namespace ccm {

struct ThermalProps {
  double c;       // J/(kg K)
  double rho;     // kg/m^3
  double lambda;  // W/(m K)
};

/// Temperature-dependent steel properties with a smeared latent-heat band
/// centred on the crystallization temperature. Immutable after construction.
class MaterialProperties {
 public:
  MaterialProperties(std::string grade, PiecewiseLinear c, PiecewiseLinear rho,
                     PiecewiseLinear lambda, double mu, double t_liquidus,
                     double t_solidus, double dt_smear);

  ThermalProps props_at(double t) const;

  /// c(t) rho(t) [J/(m^3 K)]
  double sensible_capacity(double t) const;
  /// Volumetric capacity including the latent contribution
  /// mu rho(t_kr) / (2 dt_smear) inside |t - t_kr| <= dt_smear.
  double effective_heat_capacity(double t) const;
  double latent_capacity(double t) const;

  double lambda_at(double t) const { return lambda_(t); }

  const std::string& grade() const { return grade_; }
  double mu() const { return mu_; }
  double t_liquidus() const { return t_liquidus_; }
  double t_solidus() const { return t_solidus_; }
  double t_kr() const { return t_kr_; }
  double rho_kr() const { return rho_kr_; }
  double dt_smear() const { return dt_smear_; }
  double t_min() const { return t_min_; }
  double t_max() const { return t_max_; }
  /// Smallest c*rho over the domain; governs explicit stability.
  double min_sensible_capacity() const { return min_capacity_; }
  double max_lambda() const { return max_lambda_; }

  const PiecewiseLinear& c_table() const { return c_; }
  const PiecewiseLinear& rho_table() const { return rho_; }
  const PiecewiseLinear& lambda_table() const { return lambda_; }

 private:
  std::string grade_;
  PiecewiseLinear c_, rho_, lambda_;
  double mu_, t_liquidus_, t_solidus_, t_kr_, dt_smear_;
  double rho_kr_ = 0.0;
  double t_min_ = 0.0, t_max_ = 0.0;
  double min_capacity_ = 0.0, max_lambda_ = 0.0;
};

/// Default engineering data for a medium-carbon (0.4 % C) steel.
MaterialProperties st40();

MaterialProperties load_material(const std::filesystem::path& path);
void save_material(const MaterialProperties& m, const std::filesystem::path& path);

/// Volumetric enthalpy H(T) = integral of effective_heat_capacity, tabulated
/// on a fine temperature lattice whose knots include the band edges, so the
/// latent jump is integrated exactly. temperature() inverts it.
class EnthalpyCurve {
 public:
  explicit EnthalpyCurve(const MaterialProperties& m, double max_step = 0.5);

  double enthalpy(double t) const;
  double temperature(double h) const;
  double t_min() const { return ts_.front(); }
  double t_max() const { return ts_.back(); }

 private:
  std::vector<double> ts_;
  std::vector<double> hs_;
  std::vector<std::size_t> bucket_first_;
  double bucket_width_ = 1.0;
};

}  // namespace ccm
