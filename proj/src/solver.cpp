#include "ccm/solver.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "ccm/errors.hpp"

namespace ccm {

namespace {

/// (a^4 - b^4) / (a - b), the secant conductance of a fourth-power law.
double radiation_secant(double a, double b) { return (a + b) * (a * a + b * b); }

double pow4(double t) {
  const double t2 = t * t;
  return t2 * t2;
}

ThermalBlock make_section_block(const SectionGrid& g, ThermalLaw law) {
  if (g.kind == SectionKind::curvilinear) return ThermalBlock::polar(g.name, g.across, g.along, std::move(law));
  return ThermalBlock::cartesian(g.name, g.across, g.along, std::move(law));
}

double interpolate(std::span<const double> x, std::span<const double> y, double at) {
  if (at <= x.front()) return y.front();
  if (at >= x.back()) return y.back();
  auto it = std::upper_bound(x.begin(), x.end(), at);
  const std::size_t hi = static_cast<std::size_t>(it - x.begin());
  const std::size_t lo = hi - 1;
  const double s = (at - x[lo]) / (x[hi] - x[lo]);
  return y[lo] + s * (y[hi] - y[lo]);
}

}  // namespace

void add_face_exchange(ThermalBlock& b, Face face, std::span<const double> alpha, const FaceEnvironment& env) {
  const int i = face == Face::inner ? 0 : b.ni() - 1;
  const Side side = face == Face::inner ? Side::across_low : Side::across_high;
  const double te4 = pow4(env.t_env);
  for (int j = 0; j < b.nj(); ++j) {
    const double area = b.face_area(side, j);
    const double t = b.T(i, j);
    const double q = alpha[j] * (t - env.t_env) + env.c_rad * (pow4(t) - te4);
    const double g = alpha[j] + env.c_rad * radiation_secant(t, env.t_env);
    b.add_boundary(b.index(i, j), -q * area, g * area);
  }
}

void WaterChannel::validate() const {
  if (!(v_water > 0.0)) throw ConfigError("water: v_water must be > 0");
  if (!(s_ch > 0.0)) throw ConfigError("water: channel cross-section must be > 0");
  if (!(c_w > 0.0)) throw ConfigError("water: c_w must be > 0");
  if (alpha_1 < 0.0 || alpha_e < 0.0) throw ConfigError("water: heat transfer coefficients must be >= 0");
}

void MachineConfig::validate() const {
  if (!material) throw ConfigError("machine: material is not set");
  layout.validate();
  grid.validate();
  water.validate();
  const std::size_t n = layout.curvilinear.size() + (layout.rectilinear ? 1 : 0);
  if (sections.size() != n)
    throw ConfigError(fmt::format("machine: {} section setups for {} sections", sections.size(), n));
  for (const auto& s : sections) {
    s.alpha_inner.validate();
    s.alpha_outer.validate();
    for (const auto* f : {&s.inner, &s.outer})
      if (f->c_rad < 0.0 || !(f->t_env > 0.0))
        throw ConfigError("machine: radiation coefficients must be >= 0 and temperatures > 0");
  }
  for (const auto& [t, v] : casting_speed.points())
    if (!(v >= 0.0)) throw ConfigError("machine: casting speed must be >= 0");
  (void)0;
}

double EnergyAudit::relative_error() const {
  const double scale = std::max({std::abs(enthalpy_change), gross_energy, 1e-300});
  return std::abs(enthalpy_change - boundary_energy) / scale;
}

Machine::Machine(MachineConfig config)
    : config_((config.validate(), std::move(config))),
      grids_(build_grids(config_.layout, config_.grid)),
      ingot_(ThermalBlock::cartesian("mould", grids_.mould.x, grids_.mould.z, ThermalLaw::steel(config_.material))),
      wall_(ThermalBlock::cartesian("wall", grids_.mould.wall_x, grids_.mould.wall_z,
                                    ThermalLaw::constant(config_.wall.c, config_.wall.rho, config_.wall.lambda))) {
  const ThermalLaw steel = ingot_.law();
  for (std::size_t k = 0; k < grids_.sections.size(); ++k) {
    sections_.push_back(make_section_block(grids_.sections[k], steel));
    section_alpha_.emplace_back();
  }
  ingot_.set_uniform(config_.initial_strand_temperature);
  wall_.set_uniform(config_.initial_wall_temperature);
  for (auto& b : sections_) b.set_uniform(config_.initial_strand_temperature);
  for (std::size_t k = 0; k < sections_.size(); ++k) {
    const auto& g = grids_.sections[k];
    section_alpha_[k].alpha_inner = profile_vector(config_.sections[k].alpha_inner, g.surface);
    section_alpha_[k].alpha_outer = profile_vector(config_.sections[k].alpha_outer, g.surface);
  }

  const auto& w = config_.water;
  const auto& me = config_.mould_env;
  lower_bound_ = std::min({me.t_os1, me.t_os2, me.t_os3, w.initial, config_.initial_wall_temperature,
                           config_.initial_strand_temperature, config_.pour_temperature});
  for (const auto& [t, v] : w.inlet.points()) lower_bound_ = std::min(lower_bound_, v);
  if (w.alpha_e > 0.0) lower_bound_ = std::min(lower_bound_, w.t_e);
  for (const auto& s : config_.sections) lower_bound_ = std::min({lower_bound_, s.inner.t_env, s.outer.t_env});
  upper_bound_ = std::max({config_.pour_temperature, config_.initial_strand_temperature,
                           config_.initial_wall_temperature, w.initial});
  for (const auto& [t, v] : w.inlet.points()) upper_bound_ = std::max(upper_bound_, v);

  water_.assign(grids_.mould.wall_z.size(), w.initial);
  step_water(0.0);
  reset_energy_audit();
}

std::size_t Machine::section_index(const std::string& name) const {
  if (name.empty()) throw ConfigError("section id is empty");
  for (std::size_t k = 0; k < sections_.size(); ++k)
    if (sections_[k].name() == name) return k;
  throw ConfigError("unknown section '" + name + "'");
}

const ThermalBlock& Machine::section_block(const std::string& name) const {
  return sections_[section_index(name)];
}

double Machine::section_velocity(std::size_t k) const {
  const double v = config_.casting_speed(time_);
  if (k < config_.layout.curvilinear.size())
    return config_.layout.curvilinear[k].theta(v, config_.layout.mould.l);
  return v;
}

void Machine::assemble_mould() {
  const auto& me = config_.mould_env;
  const double v = config_.casting_speed(time_);
  ingot_.begin_step();
  wall_.begin_step();
  ingot_.set_velocity(v);
  std::vector<double> pour(ingot_.ni(), config_.pour_temperature);
  ingot_.set_inflow_temperature(pour);

  const int ni = ingot_.ni();
  const int off = grids_.mould.wall_offset;
  const double g_gap = me.lambda_gz / config_.layout.mould.delta;
  std::vector<double> gap_area(wall_.nj(), 0.0);
  for (int j = 0; j < ingot_.nj(); ++j) {
    const double ts = ingot_.T(ni - 1, j);
    const double tw = wall_.T(0, j + off);
    const double area = ingot_.face_area(Side::across_high, j);
    const double q = g_gap * (ts - tw) + me.sigma_n * (pow4(ts / 100.0) - pow4(tw / 100.0));
    const double g = g_gap + me.sigma_n * radiation_secant(ts, tw) * 1e-8;
    ingot_.add_boundary(ingot_.index(ni - 1, j), -q * area, g * area);
    wall_.add_boundary(wall_.index(0, j + off), q * area, g * area);
    gap_area[j + off] = area;
  }

  const int wi = wall_.ni(), wj = wall_.nj();
  for (int j = 0; j < wj; ++j) {
    // Inner face above the meniscus (and the upper half of the z = 0 cell).
    const double air = wall_.face_area(Side::across_low, j) - gap_area[j];
    if (air > 1e-12) {
      const double t = wall_.T(0, j);
      const double q = me.alpha_4 * (t - me.t_os1) + me.c_n * (pow4(t / 100.0) - pow4(me.t_os1 / 100.0));
      const double g = me.alpha_4 + me.c_n * radiation_secant(t, me.t_os1) * 1e-8;
      wall_.add_boundary(wall_.index(0, j), -q * air, g * air);
    }
    const double t = wall_.T(wi - 1, j);
    const double area = wall_.face_area(Side::across_high, j);
    const double a1 = config_.water.alpha_1;
    wall_.add_boundary(wall_.index(wi - 1, j), -a1 * (t - water_[j]) * area, a1 * area);
  }
  for (int i = 0; i < wi; ++i) {
    const double top = wall_.T(i, 0), bottom = wall_.T(i, wj - 1);
    const double area = wall_.face_area(Side::along_low, i);
    wall_.add_boundary(wall_.index(i, 0), -me.alpha_3 * (top - me.t_os3) * area, me.alpha_3 * area);
    wall_.add_boundary(wall_.index(i, wj - 1), -me.alpha_2 * (bottom - me.t_os2) * area, me.alpha_2 * area);
  }
}

double Machine::stable_dt_mould() {
  assemble_mould();
  return std::min(ingot_.stable_dt(), wall_.stable_dt());
}

void Machine::step_mould(double dt) {
  assemble_mould();
  const double limit = std::min(ingot_.stable_dt(), wall_.stable_dt());
  if (dt > limit * (1.0 + 1e-12)) throw StabilityError("mould", dt, limit);
  ingot_.step(dt, config_.backend);
  wall_.step(dt, config_.backend);
  note_energy(0, ingot_);
  note_energy(1, wall_);
  after_step(ingot_);
  after_step(wall_);
}

void solve_water_channel(const WaterChannel& w, std::span<const double> zw, std::span<const double> wall_t, double tau,
                         std::span<double> out) {
  // Method of characteristics along the flow (z = Z towards z0): every node
  // is reached from its foot (inlet history or initial fill) through the
  // wall cells in between, relaxing exactly towards the local equilibrium.
  const int m_count = static_cast<int>(zw.size());
  if (wall_t.size() != zw.size() || out.size() != zw.size())
    throw ConfigError("water channel: array sizes differ");
  const double big_z = zw.back();
  const double denom = w.p_i * w.alpha_1 + w.p_e * w.alpha_e;
  const double beta = denom / (w.c_w * w.s_ch * w.v_water);

  std::vector<double> s_lo(m_count), s_hi(m_count), t_eq(m_count);
  for (int n = 0; n < m_count; ++n) {
    const double z_hi = n == m_count - 1 ? big_z : 0.5 * (zw[n] + zw[n + 1]);
    const double z_lo = n == 0 ? zw[0] : 0.5 * (zw[n - 1] + zw[n]);
    s_lo[n] = big_z - z_hi;
    s_hi[n] = big_z - z_lo;
    t_eq[n] = denom > 0.0 ? (w.p_i * w.alpha_1 * wall_t[n] + w.p_e * w.alpha_e * w.t_e) / denom : wall_t[n];
  }
  for (int m = 0; m < m_count; ++m) {
    const double s_m = big_z - zw[m];
    double value, s_start;
    if (tau * w.v_water >= s_m) {
      value = w.inlet(tau - s_m / w.v_water);
      s_start = 0.0;
    } else {
      value = w.initial;
      s_start = s_m - tau * w.v_water;
    }
    if (beta > 0.0) {
      for (int n = m_count - 1; n >= m; --n) {
        const double len = std::min(s_hi[n], s_m) - std::max(s_lo[n], s_start);
        if (len <= 0.0) continue;
        value = t_eq[n] + (value - t_eq[n]) * std::exp(-beta * len);
      }
    }
    if (!std::isfinite(value)) throw NumericError("water channel: non-finite temperature");
    out[m] = value;
  }
}

void Machine::step_water(double /*dt*/) {
  const int wi = wall_.ni();
  std::vector<double> face(wall_.nj());
  for (int j = 0; j < wall_.nj(); ++j) face[j] = wall_.T(wi - 1, j);
  solve_water_channel(config_.water, grids_.mould.wall_z, face, time_, water_);
}

std::vector<double> Machine::inflow_profile(std::size_t k) const {
  const ThermalBlock& b = sections_[k];
  std::vector<double> out(b.ni());
  if (k == 0) {
    const double l = config_.layout.mould.l;
    const int last = ingot_.nj() - 1;
    std::vector<double> line(ingot_.ni());
    for (int i = 0; i < ingot_.ni(); ++i) line[i] = ingot_.T(i, last);
    const double base = b.across()[0];
    for (int i = 0; i < b.ni(); ++i) out[i] = interpolate(ingot_.across(), line, std::abs(b.across()[i] - base - l));
  } else {
    const ThermalBlock& up = sections_[k - 1];
    if (up.ni() != b.ni()) throw ConfigError("section handover requires equal across node counts");
    for (int i = 0; i < b.ni(); ++i) out[i] = up.T(i, up.nj() - 1);
  }
  return out;
}

void Machine::assemble_section(std::size_t k) {
  ThermalBlock& b = sections_[k];
  const SectionSetup& setup = config_.sections[k];
  b.begin_step();
  b.set_velocity(section_velocity(k));
  const auto inflow = inflow_profile(k);
  b.set_inflow_temperature(inflow);
  add_face_exchange(b, Face::inner, section_alpha_[k].alpha_inner, setup.inner);
  add_face_exchange(b, Face::outer, section_alpha_[k].alpha_outer, setup.outer);
}

double Machine::stable_dt_section(std::size_t k) {
  assemble_section(k);
  return sections_[k].stable_dt();
}

void Machine::step_curvilinear(std::size_t k, double dt) {
  if (k >= config_.layout.curvilinear.size()) throw ConfigError("step_curvilinear: no such curvilinear section");
  step_section(k, dt);
}

void Machine::step_rectilinear(double dt) {
  if (!config_.layout.rectilinear) throw ConfigError("step_rectilinear: layout has no rectilinear section");
  step_section(sections_.size() - 1, dt);
}

void Machine::advance(double dt) {
  if (!(dt > 0.0)) return;
  const double t0 = time_;
  auto cycle = [&](auto&& stable, auto&& step) {
    double done = 0.0;
    while (dt - done > 1e-12 * dt) {
      const double remaining = dt - done;
      const double limit = stable();
      const double n = std::ceil(remaining / (0.98 * limit));
      const double h = remaining / std::max(1.0, n);
      step(h);
      done += h;
      time_ = t0 + done;
    }
    time_ = t0;
  };
  cycle([&] { return stable_dt_mould(); },
        [&](double h) {
          step_mould(h);
          const double keep = time_;
          time_ += h;
          step_water(h);
          time_ = keep;
        });
  for (std::size_t k = 0; k < sections_.size(); ++k) {
    cycle([&] { return stable_dt_section(k); }, [&](double h) { step_section(k, h); });
  }
  time_ = t0 + dt;
}

void Machine::advance_section(std::size_t k, double dt) {
  if (k >= sections_.size()) throw ConfigError("advance_section: no such section");
  double done = 0.0;
  const double t0 = time_;
  while (dt - done > 1e-12 * dt) {
    const double remaining = dt - done;
    const double n = std::ceil(remaining / (0.98 * stable_dt_section(k)));
    const double h = remaining / std::max(1.0, n);
    step_section(k, h);
    done += h;
    time_ = t0 + done;
  }
  time_ = t0 + dt;
}

void Machine::step_section(std::size_t k, double dt) {
  assemble_section(k);
  sections_[k].step(dt, config_.backend);
  note_energy(2 + k, sections_[k]);
  after_step(sections_[k]);
}

void Machine::run_to_time(double t_end, double sample_interval, const std::function<void(const Machine&)>& tap) {
  if (t_end < time_ - 1e-9) throw ConfigError("run_to_time: t_end precedes the current time");
  double next_tap = sample_interval > 0.0 ? time_ + sample_interval : std::numeric_limits<double>::infinity();
  while (t_end - time_ > 1e-9) {
    const double h = std::min({config_.grid.dt, t_end - time_, next_tap - time_});
    advance(h);
    if (tap && time_ >= next_tap - 1e-9) {
      tap(*this);
      next_tap += sample_interval;
    }
  }
}

void Machine::after_step(const ThermalBlock& b) {
  for (double t : b.T()) {
    if (!std::isfinite(t)) throw NumericError(b.name() + ": non-finite temperature");
    const double excess = std::max(lower_bound_ - t, t - upper_bound_);
    if (excess > 1e-6) {
      ++bound_violations_;
      worst_excess_ = std::max(worst_excess_, excess);
    }
  }
  if (const MaterialProperties* m = b.law().material()) {
    if (b.max_last_change_near(m->t_kr(), m->dt_smear()) > 0.5 * m->dt_smear()) {
      ++smear_warnings_;
      if (!smear_reported_) {
        smear_reported_ = true;
        fmt::print(std::cerr,
                   "warning: {}: per-step temperature change near T_kr exceeds dt_smear/2; "
                   "reduce the time step or widen dt_smear\n",
                   b.name());
      }
    }
  }
}

void Machine::note_energy(std::size_t slot, const ThermalBlock& b) {
  audit_boundary_[slot] += b.last_boundary_energy();
  audit_gross_[slot] += b.last_gross_energy();
}

std::vector<EnergyAudit> Machine::energy_audit() const {
  std::vector<EnergyAudit> out;
  auto add = [&](std::size_t slot, const ThermalBlock& b) {
    EnergyAudit a;
    a.block = b.name();
    a.enthalpy_change = b.total_enthalpy() - audit_h0_[slot];
    a.boundary_energy = audit_boundary_[slot];
    a.gross_energy = audit_gross_[slot];
    out.push_back(a);
  };
  add(0, ingot_);
  add(1, wall_);
  for (std::size_t k = 0; k < sections_.size(); ++k) add(2 + k, sections_[k]);
  return out;
}

void Machine::reset_energy_audit() {
  const std::size_t n = 2 + sections_.size();
  audit_h0_.assign(n, 0.0);
  audit_boundary_.assign(n, 0.0);
  audit_gross_.assign(n, 0.0);
  audit_h0_[0] = ingot_.total_enthalpy();
  audit_h0_[1] = wall_.total_enthalpy();
  for (std::size_t k = 0; k < sections_.size(); ++k) audit_h0_[2 + k] = sections_[k].total_enthalpy();
}

void Machine::set_profile(const std::string& section, Face face, const ChtcProfile& profile) {
  profile.validate();
  const std::size_t k = section_index(section);
  auto& setup = config_.sections[k];
  (face == Face::inner ? setup.alpha_inner : setup.alpha_outer) = profile;
  (face == Face::inner ? section_alpha_[k].alpha_inner : section_alpha_[k].alpha_outer) =
      profile_vector(profile, grids_.sections[k].surface);
}

const ChtcProfile& Machine::profile(const std::string& section, Face face) const {
  const auto& setup = config_.sections[section_index(section)];
  return face == Face::inner ? setup.alpha_inner : setup.alpha_outer;
}

void Machine::set_alpha_c(const std::string& section, Face face, double alpha_c) {
  ChtcProfile p = profile(section, face);
  p.alpha_c = alpha_c;
  set_profile(section, face, p);
}

std::vector<SurfaceSample> Machine::surface_temperature_profile(const std::string& section, Face face) const {
  std::vector<SurfaceSample> out;
  if (section == "mould") {
    for (int j = 0; j < ingot_.nj(); ++j) out.push_back({ingot_.along()[j], ingot_.T(ingot_.ni() - 1, j)});
    return out;
  }
  const ThermalBlock& b = section_block(section);
  const int i = face == Face::inner ? 0 : b.ni() - 1;
  for (int j = 0; j < b.nj(); ++j) out.push_back({b.along()[j], b.T(i, j)});
  return out;
}

PhaseFront Machine::front(const std::string& section, const PhaseFront* previous) const {
  if (section == "mould") return extract_front(ingot_, material(), FrontScan::from_high, time_, previous);
  return extract_front(section_block(section), material(), FrontScan::both, time_, previous);
}

void Machine::write_field_csv(std::ostream& out) const {
  out << "section,i,j,coord1,coord2,T\n";
  auto dump = [&](const ThermalBlock& b) {
    for (int j = 0; j < b.nj(); ++j)
      for (int i = 0; i < b.ni(); ++i)
        fmt::print(out, "{},{},{},{:.10g},{:.10g},{:.10g}\n", b.name(), i, j, b.across()[i], b.along()[j], b.T(i, j));
  };
  dump(ingot_);
  dump(wall_);
  for (const auto& b : sections_) dump(b);
}

void Machine::write_front_csv(std::ostream& out) const {
  out << "section,coord,xi\n";
  auto dump = [&](const PhaseFront& f, const std::string& low_name, const std::string& high_name) {
    for (const auto& s : f.samples) {
      if (s.low) fmt::print(out, "{},{:.10g},{:.10g}\n", low_name, s.coord, s.low->position);
      if (s.high) fmt::print(out, "{},{:.10g},{:.10g}\n", high_name, s.coord, s.high->position);
    }
  };
  dump(front("mould"), "mould", "mould");
  for (const auto& b : sections_) dump(front(b.name()), b.name() + ":inner", b.name() + ":outer");
}

}  // namespace ccm
