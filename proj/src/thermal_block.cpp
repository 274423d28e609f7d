#include "ccm/thermal_block.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "ccm/errors.hpp"

namespace ccm {

ThermalLaw ThermalLaw::steel(std::shared_ptr<const MaterialProperties> m) {
  ThermalLaw law;
  law.curve_ = std::make_shared<const EnthalpyCurve>(*m);
  law.material_ = std::move(m);
  return law;
}

ThermalLaw ThermalLaw::constant(double c, double rho, double lambda) {
  if (!(c > 0.0 && rho > 0.0 && lambda > 0.0)) throw ConfigError("constant thermal law: c, rho, lambda must be > 0");
  ThermalLaw law;
  law.c_ = c;
  law.rho_ = rho;
  law.lambda_ = lambda;
  return law;
}

double ThermalLaw::enthalpy(double t) const { return curve_ ? curve_->enthalpy(t) : c_ * rho_ * t; }

double ThermalLaw::temperature(double h) const {
  if (curve_) return curve_->temperature(h);
  if (!std::isfinite(h)) throw NumericError("enthalpy inversion: non-finite enthalpy");
  return h / (c_ * rho_);
}

double ThermalLaw::conductivity(double t) const { return material_ ? material_->lambda_at(t) : lambda_; }

double ThermalLaw::min_capacity() const { return material_ ? material_->min_sensible_capacity() : c_ * rho_; }

namespace {

std::pair<double, double> cell_bounds(std::span<const double> x, std::size_t k) {
  const double lo = k == 0 ? x[0] : 0.5 * (x[k - 1] + x[k]);
  const double hi = k + 1 == x.size() ? x[k] : 0.5 * (x[k] + x[k + 1]);
  return {lo, hi};
}

}  // namespace

ThermalBlock::ThermalBlock(std::string name, bool polar, std::vector<double> across, std::vector<double> along,
                           ThermalLaw law)
    : name_(std::move(name)),
      polar_(polar),
      ni_(static_cast<int>(across.size())),
      nj_(static_cast<int>(along.size())),
      across_(std::move(across)),
      along_(std::move(along)),
      law_(std::move(law)) {
  if (ni_ < 2 || nj_ < 1) throw ConfigError(name_ + ": block needs at least 2 x 1 nodes");
  const std::size_t n = static_cast<std::size_t>(ni_) * nj_;
  T_.assign(n, 0.0);
  H_.assign(n, 0.0);
  lambda_.assign(n, 0.0);
  H_next_.assign(n, 0.0);
  T_prev_.assign(n, 0.0);
  volume_.assign(n, 0.0);
  g_across_.assign(static_cast<std::size_t>(ni_ - 1) * nj_, 0.0);
  g_along_.assign(static_cast<std::size_t>(ni_) * std::max(nj_ - 1, 0), 0.0);
  flow_unit_.assign(ni_, 0.0);
  flow_.assign(ni_, 0.0);
  across_area_low_.assign(nj_, 0.0);
  across_area_high_.assign(nj_, 0.0);
  along_area_.assign(ni_, 0.0);
  inflow_T_.assign(ni_, 0.0);
  inflow_H_.assign(ni_, 0.0);
  source_.assign(n, 0.0);
  boundary_g_.assign(n, 0.0);
  fixed_.assign(n, 0);

  for (int j = 0; j < nj_; ++j) {
    const auto [a_lo, a_hi] = nj_ == 1 ? std::pair{0.0, 1.0} : cell_bounds(along_, j);
    const double dalong = a_hi - a_lo;
    for (int i = 0; i < ni_; ++i) {
      const auto [r_lo, r_hi] = cell_bounds(across_, i);
      volume_[index(i, j)] = polar_ ? 0.5 * (r_hi * r_hi - r_lo * r_lo) * dalong : (r_hi - r_lo) * dalong;
      if (i + 1 < ni_) {
        const double gap = across_[i + 1] - across_[i];
        const double face_r = 0.5 * (across_[i] + across_[i + 1]);
        g_across_[static_cast<std::size_t>(j) * (ni_ - 1) + i] = (polar_ ? face_r * dalong : dalong) / gap;
      }
      if (j + 1 < nj_) {
        const double gap = along_[j + 1] - along_[j];
        g_along_[index(i, j)] = (polar_ ? std::log(r_hi / r_lo) : (r_hi - r_lo)) / gap;
      }
    }
    across_area_low_[j] = polar_ ? across_.front() * dalong : dalong;
    across_area_high_[j] = polar_ ? across_.back() * dalong : dalong;
  }
  for (int i = 0; i < ni_; ++i) {
    const auto [r_lo, r_hi] = cell_bounds(across_, i);
    flow_unit_[i] = polar_ ? 0.5 * (r_hi * r_hi - r_lo * r_lo) : (r_hi - r_lo);
    along_area_[i] = r_hi - r_lo;
  }
}

ThermalBlock ThermalBlock::cartesian(std::string name, std::vector<double> across, std::vector<double> along,
                                     ThermalLaw law) {
  return ThermalBlock(std::move(name), false, std::move(across), std::move(along), std::move(law));
}

ThermalBlock ThermalBlock::polar(std::string name, std::vector<double> radii, std::vector<double> angles,
                                 ThermalLaw law) {
  if (!(radii.front() > 0.0)) throw ConfigError("polar block: radii must be positive");
  return ThermalBlock(std::move(name), true, std::move(radii), std::move(angles), std::move(law));
}

double ThermalBlock::face_area(Side side, int n) const {
  switch (side) {
    case Side::across_low: return across_area_low_[n];
    case Side::across_high: return across_area_high_[n];
    case Side::along_low:
    case Side::along_high: return along_area_[n];
  }
  return 0.0;
}

void ThermalBlock::set_uniform(double t) {
  std::vector<double> v(T_.size(), t);
  set_temperature(v);
}

void ThermalBlock::set_temperature(std::span<const double> t) {
  if (t.size() != T_.size()) throw ConfigError(name_ + ": temperature array size mismatch");
  for (std::size_t k = 0; k < T_.size(); ++k) {
    T_[k] = t[k];
    H_[k] = law_.enthalpy(t[k]);
    lambda_[k] = law_.conductivity(t[k]);
  }
  T_prev_ = T_;
  stable_cache_ = -1.0;
}

void ThermalBlock::set_fixed(int i, int j, bool fixed) {
  fixed_[index(i, j)] = fixed ? 1 : 0;
  stable_cache_ = -1.0;
}

void ThermalBlock::set_velocity(double u) {
  velocity_ = u;
  for (int i = 0; i < ni_; ++i) flow_[i] = u * flow_unit_[i];
  stable_cache_ = -1.0;
}

void ThermalBlock::set_inflow_temperature(std::span<const double> t_in) {
  if (t_in.size() != inflow_T_.size()) throw ConfigError(name_ + ": inflow profile size mismatch");
  for (int i = 0; i < ni_; ++i) {
    inflow_T_[i] = t_in[i];
    inflow_H_[i] = law_.enthalpy(t_in[i]);
  }
}

void ThermalBlock::begin_step() {
  std::fill(source_.begin(), source_.end(), 0.0);
  std::fill(boundary_g_.begin(), boundary_g_.end(), 0.0);
  stable_cache_ = -1.0;
}

void ThermalBlock::add_boundary(std::size_t k, double heat, double conductance) {
  source_[k] += heat;
  boundary_g_[k] += conductance;
  if (conductance != 0.0) stable_cache_ = -1.0;
}

double ThermalBlock::stable_dt() const {
  if (stable_cache_ >= 0.0) return stable_cache_;
  const double cmin = law_.min_capacity();
  double worst = 0.0;
  for (int j = 0; j < nj_; ++j) {
    for (int i = 0; i < ni_; ++i) {
      const std::size_t k = index(i, j);
      if (fixed_[k]) continue;
      double g = boundary_g_[k];
      const double lam = lambda_[k];
      if (i > 0) g += g_across_[static_cast<std::size_t>(j) * (ni_ - 1) + i - 1] * 0.5 * (lam + lambda_[k - 1]);
      if (i + 1 < ni_) g += g_across_[static_cast<std::size_t>(j) * (ni_ - 1) + i] * 0.5 * (lam + lambda_[k + 1]);
      if (j > 0) g += g_along_[index(i, j - 1)] * 0.5 * (lam + lambda_[k - ni_]);
      if (j + 1 < nj_) g += g_along_[k] * 0.5 * (lam + lambda_[k + ni_]);
      const double rate = g / (cmin * volume_[k]) + std::abs(flow_[i]) / volume_[k];
      worst = std::max(worst, rate);
    }
  }
  stable_cache_ = worst > 0.0 ? 0.8 / worst : std::numeric_limits<double>::infinity();
  return stable_cache_;
}

kernels::StencilView ThermalBlock::view() const {
  kernels::StencilView v;
  v.ni = ni_;
  v.nj = nj_;
  v.T = T_;
  v.H = H_;
  v.lambda = lambda_;
  v.g_across = g_across_;
  v.g_along = g_along_;
  v.flow = flow_;
  v.inflow_H = inflow_H_;
  v.volume = volume_;
  v.source = source_;
  v.fixed = fixed_;
  return v;
}

void ThermalBlock::step(double dt, kernels::Backend backend) {
  const double limit = stable_dt();
  if (dt > limit * (1.0 + 1e-12)) throw StabilityError(name_, dt, limit);

  kernels::explicit_update(backend, view(), dt, H_next_);

  double boundary = 0.0, gross = 0.0;
  for (double s : source_) {
    boundary += s;
    gross += std::abs(s);
  }
  for (int i = 0; i < ni_; ++i) {
    const double in = flow_[i] * inflow_H_[i];
    const double out = flow_[i] * H_[index(i, nj_ - 1)];
    boundary += in - out;
    gross += std::abs(in) + std::abs(out);
  }
  last_boundary_energy_ = dt * boundary;
  last_gross_energy_ = dt * gross;

  T_prev_ = T_;
  H_.swap(H_next_);
  stable_cache_ = -1.0;
  refresh_derived(backend);

  double change = 0.0;
  for (std::size_t k = 0; k < T_.size(); ++k) change = std::max(change, std::abs(T_[k] - T_prev_[k]));
  max_last_change_ = change;
}

double ThermalBlock::max_last_change_near(double t_center, double band) const {
  double change = 0.0;
  for (std::size_t k = 0; k < T_.size(); ++k)
    if (std::abs(T_[k] - t_center) <= band || std::abs(T_prev_[k] - t_center) <= band)
      change = std::max(change, std::abs(T_[k] - T_prev_[k]));
  return change;
}

void ThermalBlock::refresh_derived(kernels::Backend backend) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(H_.size());
  bool bad = false;
  std::string what;
  auto body = [&](std::ptrdiff_t k) {
    try {
      T_[k] = law_.temperature(H_[k]);
      lambda_[k] = law_.conductivity(T_[k]);
    } catch (const std::exception& e) {
#pragma omp critical(ccm_refresh)
      {
        bad = true;
        what = e.what();
      }
    }
  };
  if (backend == kernels::Backend::openmp) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < n; ++k) body(k);
  } else {
    for (std::ptrdiff_t k = 0; k < n; ++k) body(k);
  }
  if (bad) throw NumericError(fmt::format("{}: {}", name_, what));
}

double ThermalBlock::total_enthalpy() const {
  double s = 0.0;
  for (std::size_t k = 0; k < H_.size(); ++k) s += volume_[k] * H_[k];
  return s;
}

}  // namespace ccm
