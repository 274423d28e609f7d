#include "ccm/ident_lsq.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "ccm/errors.hpp"

namespace ccm {

InteriorContext interior_context(const Machine& model, const std::string& section) {
  const std::size_t k = model.section_index(section);
  const auto& setup = model.config().sections[k];
  const auto& surface = model.grids().sections[k].surface;
  return InteriorContext{model.section_block(k), setup.inner, setup.outer,
                         profile_vector(setup.alpha_inner, surface), profile_vector(setup.alpha_outer, surface)};
}

ThermalBlock relax_interior(const InteriorContext& context, const SurfaceMeasurement& measured,
                           const DirichletOptions& options) {
  ThermalBlock block = context.block;
  const int ni = block.ni(), nj = block.nj();
  if (ni < 3) throw ConfigError("interior solve needs at least 3 nodes across the section");
  if (measured.inner.empty() && measured.outer.empty()) throw ConfigError("interior solve: no measurements");
  for (const auto* m : {&measured.inner, &measured.outer}) {
    if (!m->empty() && m->size() != static_cast<std::size_t>(nj))
      throw ConfigError(fmt::format("interior solve: {} measurements for {} surface nodes", m->size(), nj));
    for (double t : *m)
      if (!std::isfinite(t)) throw ConfigError("interior solve: non-finite measured temperature");
  }

  std::vector<double> field(block.T().begin(), block.T().end());
  auto pin = [&](const std::vector<double>& values, int i) {
    if (values.empty()) return;
    for (int j = 0; j < nj; ++j) {
      field[block.index(i, j)] = values[j];
      block.set_fixed(i, j, true);
    }
  };
  pin(measured.inner, 0);
  pin(measured.outer, ni - 1);
  block.set_temperature(field);

  double rate = 0.0;
  for (int step = 0; step < options.max_steps; ++step) {
    block.begin_step();
    if (measured.inner.empty()) add_face_exchange(block, Face::inner, context.alpha_inner, context.inner_env);
    if (measured.outer.empty()) add_face_exchange(block, Face::outer, context.alpha_outer, context.outer_env);
    const double dt = 0.98 * block.stable_dt();
    block.step(dt, options.backend);
    rate = block.max_last_change() / dt;
    if (rate < options.tolerance) return block;
  }
  throw NumericError(fmt::format("interior solve did not converge in {} steps (residual {:.3e} K/s)",
                                 options.max_steps, rate));
}

StencilTemperatures face_stencil(const ThermalBlock& block, Face face) {
  const int ni = block.ni();
  StencilTemperatures s;
  s.q = std::abs(block.across()[1] - block.across()[0]);
  const int i0 = face == Face::inner ? 0 : ni - 1;
  const int di = face == Face::inner ? 1 : -1;
  for (int j = 0; j < block.nj(); ++j) {
    s.t0.push_back(block.T(i0, j));
    s.t1.push_back(block.T(i0 + di, j));
    s.t2.push_back(block.T(i0 + 2 * di, j));
    s.lambda0.push_back(block.lambda()[block.index(i0, j)]);
  }
  return s;
}

StencilTemperatures solve_interior_dirichlet(const InteriorContext& context, const SurfaceMeasurement& measured,
                                             Face face, const DirichletOptions& options) {
  if ((face == Face::inner ? measured.inner : measured.outer).empty())
    throw ConfigError("interior solve: the identified face has no measurements");
  return face_stencil(relax_interior(context, measured, options), face);
}

FluxSamples flux_samples(const StencilTemperatures& s, const FaceEnvironment& env, const SectionGrid& grid) {
  const std::size_t n = s.t0.size();
  if (s.t1.size() != n || s.t2.size() != n || s.lambda0.size() != n || grid.surface.size() != n)
    throw ConfigError("flux samples: stencil and surface grid sizes differ");
  FluxSamples out;
  const double te4 = std::pow(env.t_env, 4);
  for (std::size_t i = 0; i < n; ++i) {
    const double t0 = s.t0[i];
    const double p = s.lambda0[i] * (s.t2[i] - 4.0 * s.t1[i] + 3.0 * t0) / (2.0 * s.q) -
                     env.c_rad * (te4 - t0 * t0 * t0 * t0);
    const SurfaceNode& node = grid.surface[i];
    out.coord.push_back(node.coord);
    out.p.push_back(p);
    out.q.push_back(env.t_env - t0);
    out.membership.push_back(node.membership);
    out.y.push_back(node.membership == Membership::B ? std::optional<double>(node.offset) : std::nullopt);
  }
  return out;
}

double fit_alpha_c(std::span<const double> p, std::span<const double> q) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (std::abs(q[i]) < min_abs_q) continue;
    num += q[i] * p[i];
    den += q[i] * q[i];
  }
  if (!(den > 0.0)) throw DegenerateDataError("fit_alpha_c: sum of Q^2 is zero (surface at ambient everywhere)");
  return num / den;
}

double fit_alpha_p(std::span<const double> p, std::span<const double> q, std::span<const double> y, double alpha_c,
                   double w) {
  if (!(w > 0.0)) throw ConfigError("fit_alpha_p: w must be > 0");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (std::abs(q[i]) < min_abs_q) continue;
    const double f = y[i] * y[i] / (w * w) - 1.0;
    num += alpha_c * q[i] * q[i] * f - p[i] * q[i] * f;
    den += q[i] * q[i] * f * f;
  }
  if (!(den > 0.0))
    throw DegenerateDataError("fit_alpha_p: degenerate footprint data (all samples at the edges or Q = 0)");
  return num / den;
}

namespace {

struct Subset {
  std::vector<double> p, q, y;
};

Subset subset(const FluxSamples& s, Membership m) {
  Subset out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s.membership[i] != m) continue;
    out.p.push_back(s.p[i]);
    out.q.push_back(s.q[i]);
    out.y.push_back(s.y[i].value_or(0.0));
  }
  return out;
}

}  // namespace

double fit_alpha_c(const FluxSamples& samples) {
  const Subset k = subset(samples, Membership::K);
  return fit_alpha_c(k.p, k.q);
}

double fit_alpha_p(const FluxSamples& samples, double alpha_c, double w) {
  const Subset b = subset(samples, Membership::B);
  return fit_alpha_p(b.p, b.q, b.y, alpha_c, w);
}

DirectReversion direct_reversion(const FluxSamples& samples) {
  DirectReversion out;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (std::abs(samples.q[i]) < min_abs_q) {
      ++out.excluded;
      continue;
    }
    out.coord.push_back(samples.coord[i]);
    out.alpha.push_back(samples.p[i] / samples.q[i]);
    out.source_index.push_back(i);
  }
  return out;
}

Identification identify(const InteriorContext& context, const SectionGrid& grid, const SurfaceMeasurement& measured,
                        Face face, const DirichletOptions& options) {
  if (grid.count_in(Membership::K) == 0)
    throw DegenerateDataError(grid.name +
                              ": every surface node lies in a nozzle footprint; extend the section or narrow w so "
                              "that nozzle-free nodes exist");
  const StencilTemperatures stencil = solve_interior_dirichlet(context, measured, face, options);
  const FaceEnvironment& env = face == Face::inner ? context.inner_env : context.outer_env;

  Identification id;
  id.section = grid.name;
  id.face = face;
  id.samples = flux_samples(stencil, env, grid);
  const double alpha_c = fit_alpha_c(id.samples);
  double alpha_p = 0.0;
  if (grid.count_in(Membership::B) > 0) alpha_p = fit_alpha_p(id.samples, alpha_c, grid.w);
  id.alpha_p_raw = alpha_p;
  id.no_enhancement = std::abs(alpha_p) <= 0.02 * std::abs(alpha_c);

  id.profile.alpha_c = alpha_c;
  id.profile.alpha_p = std::max(alpha_p, 0.0);
  id.profile.w = grid.w;
  id.profile.nozzles = grid.nozzles;

  double ss = 0.0;
  for (std::size_t i = 0; i < id.samples.size(); ++i) {
    if (std::abs(id.samples.q[i]) < min_abs_q) {
      ++id.excluded;
      continue;
    }
    const double y = id.samples.y[i].value_or(grid.w);
    const double alpha = alpha_c + alpha_p * (1.0 - y * y / (grid.w * grid.w));
    const double r = id.samples.p[i] - alpha * id.samples.q[i];
    ss += r * r;
  }
  id.residual_norm = std::sqrt(ss);
  return id;
}

void write_identification_report(std::ostream& out, const Identification& id) {
  out << "coord,membership,P,Q,y,alpha_direct\n";
  const auto& s = id.samples;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const std::string y = s.y[i] ? fmt::format("{:.10g}", *s.y[i]) : std::string();
    const std::string direct = std::abs(s.q[i]) < min_abs_q ? std::string() : fmt::format("{:.10g}", s.p[i] / s.q[i]);
    fmt::print(out, "{:.10g},{},{:.10g},{:.10g},{},{}\n", s.coord[i], s.membership[i] == Membership::K ? "K" : "B",
               s.p[i], s.q[i], y, direct);
  }
  fmt::print(out, "# section,{}\n", id.section);
  fmt::print(out, "# face,{}\n", id.face == Face::inner ? "inner" : "outer");
  fmt::print(out, "# alpha_c,{:.10g}\n", id.profile.alpha_c);
  fmt::print(out, "# alpha_p,{:.10g}\n", id.alpha_p_raw);
  fmt::print(out, "# residual_norm,{:.10g}\n", id.residual_norm);
  fmt::print(out, "# excluded,{}\n", id.excluded);
  fmt::print(out, "# no_enhancement,{}\n", id.no_enhancement ? "true" : "false");
}

}  // namespace ccm
