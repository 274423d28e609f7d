#include "ccm/material.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "ccm/errors.hpp"

namespace ccm {

DomainError::DomainError(const std::string& property, double t, double lo, double hi)
    : std::domain_error(fmt::format("{}: temperature {:.6g} K outside table domain [{:.6g}, {:.6g}] K",
                                    property, t, lo, hi)),
      property_(property) {}

StabilityError::StabilityError(const std::string& region, double dt, double dt_max)
    : NumericError(fmt::format("{}: time step {:.6g} s exceeds the explicit stability bound; "
                               "admissible dt <= {:.6g} s",
                               region, dt, dt_max)),
      dt_max_(dt_max) {}

PiecewiseLinear::PiecewiseLinear(std::string name, std::vector<std::pair<double, double>> knots)
    : name_(std::move(name)) {
  if (knots.empty()) throw ConfigError(name_ + ": empty table");
  std::sort(knots.begin(), knots.end());
  for (std::size_t k = 0; k < knots.size(); ++k) {
    if (k > 0 && !(knots[k].first > knots[k - 1].first))
      throw ConfigError(fmt::format("{}: duplicate knot at {}", name_, knots[k].first));
    xs_.push_back(knots[k].first);
    ys_.push_back(knots[k].second);
  }
}

double PiecewiseLinear::operator()(double x) const {
  if (!(x >= xs_.front() && x <= xs_.back())) throw DomainError(name_, x, xs_.front(), xs_.back());
  if (xs_.size() == 1) return ys_.front();
  auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
  std::size_t hi = std::min<std::size_t>(static_cast<std::size_t>(it - xs_.begin()), xs_.size() - 1);
  std::size_t lo = hi - 1;
  const double s = (x - xs_[lo]) / (xs_[hi] - xs_[lo]);
  return ys_[lo] + s * (ys_[hi] - ys_[lo]);
}

MaterialProperties::MaterialProperties(std::string grade, PiecewiseLinear c, PiecewiseLinear rho,
                                       PiecewiseLinear lambda, double mu, double t_liquidus,
                                       double t_solidus, double dt_smear)
    : grade_(std::move(grade)),
      c_(std::move(c)),
      rho_(std::move(rho)),
      lambda_(std::move(lambda)),
      mu_(mu),
      t_liquidus_(t_liquidus),
      t_solidus_(t_solidus),
      t_kr_(0.5 * (t_liquidus + t_solidus)),
      dt_smear_(dt_smear) {
  for (const PiecewiseLinear* tab : {&c_, &rho_, &lambda_}) {
    for (double y : tab->ys())
      if (!(y > 0.0)) throw ConfigError(tab->name() + ": table values must be strictly positive");
  }
  if (!(mu_ > 0.0)) throw ConfigError("material: latent heat mu must be > 0");
  if (!(dt_smear_ > 0.0)) throw ConfigError("material: dt_smear must be > 0");
  if (!(t_solidus_ <= t_liquidus_)) throw ConfigError("material: t_solidus must not exceed t_liquidus");
  t_min_ = std::max({c_.x_min(), rho_.x_min(), lambda_.x_min()});
  t_max_ = std::min({c_.x_max(), rho_.x_max(), lambda_.x_max()});
  if (!(t_kr_ - dt_smear_ >= t_min_ && t_kr_ + dt_smear_ <= t_max_))
    throw ConfigError("material: smearing band must lie inside the common table domain");
  rho_kr_ = rho_(t_kr_);

  // Products of two linear pieces are quadratics; their minimum over the
  // domain is attained at a knot or an interior stationary point.
  std::vector<double> probe;
  for (const PiecewiseLinear* tab : {&c_, &rho_, &lambda_})
    for (double x : tab->xs())
      if (x >= t_min_ && x <= t_max_) probe.push_back(x);
  probe.push_back(t_min_);
  probe.push_back(t_max_);
  std::sort(probe.begin(), probe.end());
  min_capacity_ = std::numeric_limits<double>::infinity();
  max_lambda_ = 0.0;
  for (std::size_t k = 0; k + 1 < probe.size(); ++k) {
    for (int s = 0; s <= 16; ++s) {
      const double t = probe[k] + (probe[k + 1] - probe[k]) * s / 16.0;
      min_capacity_ = std::min(min_capacity_, sensible_capacity(t));
      max_lambda_ = std::max(max_lambda_, lambda_(t));
    }
  }
}

ThermalProps MaterialProperties::props_at(double t) const { return {c_(t), rho_(t), lambda_(t)}; }

double MaterialProperties::sensible_capacity(double t) const { return c_(t) * rho_(t); }

double MaterialProperties::latent_capacity(double t) const {
  if (std::abs(t - t_kr_) <= dt_smear_) return mu_ * rho_kr_ / (2.0 * dt_smear_);
  return 0.0;
}

double MaterialProperties::effective_heat_capacity(double t) const {
  return sensible_capacity(t) + latent_capacity(t);
}

MaterialProperties st40() {
  // Engineering estimates for a 0.4 % C carbon steel (solid through liquid).
  // c: J/(kg K); rho: kg/m^3; lambda: W/(m K). Temperatures in K.
  PiecewiseLinear c("c", {{250.0, 460.0},
                          {300.0, 470.0},
                          {600.0, 560.0},
                          {900.0, 700.0},
                          {1000.0, 760.0},
                          {1100.0, 640.0},
                          {1400.0, 660.0},
                          {1700.0, 690.0},
                          {1800.0, 780.0},
                          {2000.0, 800.0}});
  PiecewiseLinear rho("rho", {{250.0, 7860.0},
                              {300.0, 7850.0},
                              {800.0, 7700.0},
                              {1200.0, 7550.0},
                              {1700.0, 7350.0},
                              {1800.0, 7050.0},
                              {2000.0, 6950.0}});
  PiecewiseLinear lambda("lambda", {{250.0, 51.0},
                                    {300.0, 50.0},
                                    {700.0, 41.0},
                                    {1000.0, 30.0},
                                    {1200.0, 28.0},
                                    {1500.0, 31.0},
                                    {1700.0, 33.0},
                                    {1800.0, 35.0},
                                    {2000.0, 37.0}});
  return MaterialProperties("st40", std::move(c), std::move(rho), std::move(lambda), 2.7e5, 1768.0,
                            1720.0, 10.0);
}

namespace {

PiecewiseLinear read_table(const YAML::Node& root, const std::string& key) {
  const YAML::Node node = root[key];
  if (!node || !node.IsSequence()) throw ConfigError("material file: missing table '" + key + "'");
  std::vector<std::pair<double, double>> knots;
  for (const auto& row : node) {
    if (!row.IsSequence() || row.size() != 2)
      throw ConfigError("material file: table '" + key + "' rows must be [T, value]");
    knots.emplace_back(row[0].as<double>(), row[1].as<double>());
  }
  const std::string name = key.substr(0, key.find("_table"));
  return PiecewiseLinear(name, std::move(knots));
}

double read_scalar(const YAML::Node& root, const std::string& key) {
  if (!root[key]) throw ConfigError("material file: missing scalar '" + key + "'");
  return root[key].as<double>();
}

}  // namespace

MaterialProperties load_material(const std::filesystem::path& path) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path.string());
  } catch (const YAML::Exception& e) {
    throw ConfigError(fmt::format("material file {}: {}", path.string(), e.what()));
  }
  try {
    const std::string grade = root["grade"] ? root["grade"].as<std::string>() : path.stem().string();
    return MaterialProperties(grade, read_table(root, "c_table"), read_table(root, "rho_table"),
                              read_table(root, "lambda_table"), read_scalar(root, "mu"),
                              read_scalar(root, "t_liquidus"), read_scalar(root, "t_solidus"),
                              root["dt_smear"] ? root["dt_smear"].as<double>() : 10.0);
  } catch (const YAML::Exception& e) {
    throw ConfigError(fmt::format("material file {}: {}", path.string(), e.what()));
  }
}

void save_material(const MaterialProperties& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write material file " + path.string());
  out << "# Steel thermophysical properties.\n"
         "# Tables are [T (K), value] rows, linearly interpolated:\n"
         "#   c_table      specific heat        J/(kg K)\n"
         "#   rho_table    density              kg/m^3\n"
         "#   lambda_table thermal conductivity W/(m K)\n"
         "# mu: latent heat of crystallization J/kg; t_liquidus, t_solidus: K;\n"
         "# dt_smear: half-width of the latent-heat band around (t_liquidus+t_solidus)/2, K.\n";
  out << "grade: " << m.grade() << "\n";
  auto dump = [&](const char* key, const PiecewiseLinear& t) {
    out << key << ":\n";
    for (std::size_t k = 0; k < t.xs().size(); ++k)
      out << fmt::format("  - [{}, {}]\n", t.xs()[k], t.ys()[k]);
  };
  dump("c_table", m.c_table());
  dump("rho_table", m.rho_table());
  dump("lambda_table", m.lambda_table());
  out << fmt::format("mu: {}\nt_liquidus: {}\nt_solidus: {}\ndt_smear: {}\n", m.mu(), m.t_liquidus(),
                     m.t_solidus(), m.dt_smear());
}

EnthalpyCurve::EnthalpyCurve(const MaterialProperties& m, double max_step) {
  std::vector<double> knots;
  const double lo = m.t_min(), hi = m.t_max();
  const int n = static_cast<int>(std::ceil((hi - lo) / max_step));
  for (int k = 0; k <= n; ++k) knots.push_back(lo + (hi - lo) * k / n);
  for (const PiecewiseLinear* tab : {&m.c_table(), &m.rho_table()})
    for (double x : tab->xs())
      if (x > lo && x < hi) knots.push_back(x);
  knots.push_back(m.t_kr() - m.dt_smear());
  knots.push_back(m.t_kr() + m.dt_smear());
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end(),
                          [](double a, double b) { return std::abs(a - b) < 1e-9; }),
              knots.end());

  ts_ = knots;
  hs_.assign(ts_.size(), 0.0);
  const double latent = m.mu() * m.rho_kr() / (2.0 * m.dt_smear());
  const double band_lo = m.t_kr() - m.dt_smear(), band_hi = m.t_kr() + m.dt_smear();
  for (std::size_t k = 1; k < ts_.size(); ++k) {
    const double a = ts_[k - 1], b = ts_[k];
    // c*rho is quadratic between table knots, so Simpson is exact here.
    const double sensible =
        (b - a) / 6.0 *
        (m.sensible_capacity(a) + 4.0 * m.sensible_capacity(0.5 * (a + b)) + m.sensible_capacity(b));
    const double overlap = std::max(0.0, std::min(b, band_hi) - std::max(a, band_lo));
    hs_[k] = hs_[k - 1] + sensible + latent * overlap;
  }

  const std::size_t buckets = 4 * hs_.size();
  bucket_width_ = (hs_.back() - hs_.front()) / static_cast<double>(buckets);
  bucket_first_.resize(buckets);
  for (std::size_t b = 0; b < buckets; ++b) {
    const double start = hs_.front() + bucket_width_ * static_cast<double>(b);
    bucket_first_[b] = static_cast<std::size_t>(std::upper_bound(hs_.begin(), hs_.end(), start) - hs_.begin());
  }
}

double EnthalpyCurve::enthalpy(double t) const {
  if (!(t >= ts_.front() && t <= ts_.back())) throw DomainError("enthalpy", t, ts_.front(), ts_.back());
  auto it = std::upper_bound(ts_.begin(), ts_.end(), t);
  std::size_t hi = std::min<std::size_t>(static_cast<std::size_t>(it - ts_.begin()), ts_.size() - 1);
  std::size_t lo = hi - 1;
  const double s = (t - ts_[lo]) / (ts_[hi] - ts_[lo]);
  return hs_[lo] + s * (hs_[hi] - hs_[lo]);
}

double EnthalpyCurve::temperature(double h) const {
  if (!(h >= hs_.front() && h <= hs_.back())) {
    if (!std::isfinite(h)) throw NumericError("enthalpy inversion: non-finite enthalpy");
    throw DomainError("temperature(H)", h, hs_.front(), hs_.back());
  }
  // Bucket lookup, then the same interval std::upper_bound would return.
  const auto b = std::min(bucket_first_.size() - 1, static_cast<std::size_t>((h - hs_.front()) / bucket_width_));
  std::size_t it = bucket_first_[b];
  while (it > 0 && hs_[it - 1] > h) --it;
  while (it < hs_.size() && hs_[it] <= h) ++it;
  std::size_t hi = std::min(it, hs_.size() - 1);
  std::size_t lo = hi - 1;
  const double s = (h - hs_[lo]) / (hs_[hi] - hs_[lo]);
  return ts_[lo] + s * (ts_[hi] - ts_[lo]);
}

}  // namespace ccm
