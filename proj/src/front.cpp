#include "ccm/front.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace ccm {

bool PhaseFront::has_front() const {
  return std::any_of(samples.begin(), samples.end(), [](const FrontSample& s) { return s.low || s.high; });
}

double PhaseFront::mean_relative_residual() const {
  double sum = 0.0;
  int n = 0;
  for (const auto& s : samples) {
    for (const auto* p : {&s.low, &s.high}) {
      if (!*p || !(*p)->has_velocity) continue;
      const double scale = std::max(std::abs((*p)->solid_flux), std::abs((*p)->liquid_flux));
      if (scale <= 0.0) continue;
      sum += std::abs((*p)->residual) / scale;
      ++n;
    }
  }
  return n ? sum / n : 0.0;
}

std::optional<double> locate_isotherm(std::span<const double> coords, std::span<const double> values,
                                      double level, bool from_low) {
  const int n = static_cast<int>(values.size());
  if (n < 2) return std::nullopt;
  const int first = from_low ? 0 : n - 1;
  const int dir = from_low ? 1 : -1;
  if (values[first] >= level) return std::nullopt;
  for (int a = first; a + dir >= 0 && a + dir < n; a += dir) {
    const int b = a + dir;
    if (values[b] >= level) {
      const double s = (level - values[a]) / (values[b] - values[a]);
      return coords[a] + s * (coords[b] - coords[a]);
    }
  }
  return std::nullopt;
}

namespace {

struct Crossing {
  double position;
  int solid;   // last node on the solid side
  int liquid;  // first node on the liquid side
};

std::optional<Crossing> crossing(std::span<const double> x, std::span<const double> t, double level,
                                 bool from_low) {
  auto pos = locate_isotherm(x, t, level, from_low);
  if (!pos) return std::nullopt;
  const int n = static_cast<int>(t.size());
  const int dir = from_low ? 1 : -1;
  int a = from_low ? 0 : n - 1;
  while (t[a + dir] < level) a += dir;
  return Crossing{*pos, a, a + dir};
}

// d/dx at x0 of the interpolant through up to three nodes.
double slope_at(std::span<const double> x, std::span<const double> t, const std::vector<int>& idx, double x0) {
  if (idx.size() == 2) return (t[idx[1]] - t[idx[0]]) / (x[idx[1]] - x[idx[0]]);
  const double a = x[idx[0]], b = x[idx[1]], c = x[idx[2]];
  return t[idx[0]] * ((x0 - b) + (x0 - c)) / ((a - b) * (a - c)) +
         t[idx[1]] * ((x0 - a) + (x0 - c)) / ((b - a) * (b - c)) +
         t[idx[2]] * ((x0 - a) + (x0 - b)) / ((c - a) * (c - b));
}

// Nodes walking away from the front from `start` in direction `step` whose
// temperature lies outside the smearing band on the given side.
std::vector<int> clear_of_band(std::span<const double> t, int start, int step, double edge, bool solid_side) {
  std::vector<int> idx;
  const int n = static_cast<int>(t.size());
  for (int i = start; i >= 0 && i < n && idx.size() < 3; i += step) {
    const bool clear = solid_side ? t[i] <= edge : t[i] >= edge;
    if (clear) idx.push_back(i);
    else if (!idx.empty()) break;
  }
  return idx;
}

}  // namespace

PhaseFront extract_front(const ThermalBlock& field, const MaterialProperties& material, FrontScan scan,
                         double time, const PhaseFront* previous) {
  PhaseFront front;
  front.section = field.name();
  front.time = time;
  const int ni = field.ni(), nj = field.nj();
  const auto x = field.across();
  const double level = material.t_kr();
  std::vector<double> line(ni);

  for (int j = 0; j < nj; ++j) {
    for (int i = 0; i < ni; ++i) line[i] = field.T(i, j);
    FrontSample sample;
    sample.coord = field.along()[j];
    for (bool from_low : {true, false}) {
      if (scan == FrontScan::from_low && !from_low) continue;
      if (scan == FrontScan::from_high && from_low) continue;
      auto c = crossing(x, line, level, from_low);
      if (!c) continue;
      const int dir = from_low ? 1 : -1;
      FrontPoint p;
      p.position = c->position;
      // One-sided gradients along the normal pointing into the liquid, from
      // the first nodes clear of the smearing band on each side.
      const std::vector<int> solid =
          clear_of_band(line, c->solid, -dir, level - material.dt_smear(), true);
      if (solid.size() >= 2) {
        const double g = slope_at(x, line, solid, p.position) * dir;
        p.solid_flux = material.lambda_at(std::min(level, line[solid[0]])) * g;
      }
      const std::vector<int> liquid =
          clear_of_band(line, c->liquid, dir, level + material.dt_smear(), false);
      if (liquid.size() >= 2) {
        const double g = slope_at(x, line, liquid, p.position) * dir;
        p.liquid_flux = material.lambda_at(std::max(level, line[liquid[0]])) * g;
      }
      (from_low ? sample.low : sample.high) = p;
    }
    front.samples.push_back(sample);
  }

  // Normal solidification speed: d(xi)/dtau + u d(xi)/d(along), signed so that
  // a thickening shell is positive.
  const double u = field.velocity();
  const double latent = material.mu() * material.rho_kr();
  for (int j = 0; j < nj; ++j) {
    for (bool low : {true, false}) {
      auto& opt = low ? front.samples[j].low : front.samples[j].high;
      if (!opt) continue;
      const double sign = low ? 1.0 : -1.0;
      auto pos_at = [&](int jj) -> std::optional<double> {
        if (jj < 0 || jj >= nj) return std::nullopt;
        const auto& o = low ? front.samples[jj].low : front.samples[jj].high;
        return o ? std::optional<double>(o->position) : std::nullopt;
      };
      double dxi_ds = 0.0;
      auto left = pos_at(j - 1), right = pos_at(j + 1);
      const auto s = field.along();
      if (left && right)
        dxi_ds = (*right - *left) / (s[j + 1] - s[j - 1]);
      else if (right)
        dxi_ds = (*right - opt->position) / (s[j + 1] - s[j]);
      else if (left)
        dxi_ds = (opt->position - *left) / (s[j] - s[j - 1]);

      std::optional<double> dxi_dt;
      if (previous && previous->samples.size() == front.samples.size() && time > previous->time) {
        const auto& o = low ? previous->samples[j].low : previous->samples[j].high;
        if (o) dxi_dt = (opt->position - o->position) / (time - previous->time);
      }
      if (!dxi_dt) continue;
      opt->has_velocity = true;
      opt->latent_flux = latent * sign * (*dxi_dt + u * dxi_ds);
      opt->residual = opt->solid_flux - opt->liquid_flux - opt->latent_flux;
    }
  }
  return front;
}

}  // namespace ccm
