#include "ccm/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "ccm/errors.hpp"
#include "ccm/plots.hpp"

namespace ccm {

void RunHealth::merge(const RunHealth& o) {
  worst_energy_error = std::max(worst_energy_error, o.worst_energy_error);
  intervals += o.intervals;
  bound_violations += o.bound_violations;
  worst_bound_excess = std::max(worst_bound_excess, o.worst_bound_excess);
  smear_warnings += o.smear_warnings;
}

void RunHealth::absorb(const Machine& m) {
  bound_violations += m.max_principle_violations();
  worst_bound_excess = std::max(worst_bound_excess, m.worst_bound_excess());
  smear_warnings += m.smear_warnings();
}

void run_audited(Machine& m, double t_end, double report, RunHealth& health) {
  const long v0 = m.max_principle_violations();
  const long s0 = m.smear_warnings();
  while (t_end - m.time() > 1e-9) {
    m.reset_energy_audit();
    m.run_to_time(std::min(t_end, m.time() + report));
    for (const auto& a : m.energy_audit()) health.worst_energy_error = std::max(health.worst_energy_error, a.relative_error());
    ++health.intervals;
  }
  health.bound_violations += m.max_principle_violations() - v0;
  health.worst_bound_excess = std::max(health.worst_bound_excess, m.worst_bound_excess());
  health.smear_warnings += m.smear_warnings() - s0;
}

NoiseSource::NoiseSource(const std::string& distribution, double sigma, std::uint64_t seed)
    : uniform_(distribution == "uniform"), sigma_(sigma), rng_(seed) {
  if (!(sigma >= 0.0)) throw ConfigError("noise: sigma must be >= 0");
  if (distribution != "gaussian" && distribution != "uniform")
    throw ConfigError("noise: distribution must be gaussian or uniform");
}

double NoiseSource::operator()() {
  if (sigma_ == 0.0) return 0.0;
  return uniform_ ? std::sqrt(3.0) * sigma_ * flat_(rng_) : sigma_ * normal_(rng_);
}

namespace {

std::vector<double> face_values(const Machine& m, const std::string& section, Face face,
                                const std::vector<int>& nodes) {
  const auto prof = m.surface_temperature_profile(section, face);
  std::vector<double> out;
  if (nodes.empty()) {
    for (const auto& s : prof) out.push_back(s.t);
  } else {
    for (int j : nodes) out.push_back(prof.at(static_cast<std::size_t>(j)).t);
  }
  return out;
}

ExperimentConfig truncated(const ExperimentConfig& cfg, const std::string& section) {
  ExperimentConfig out = cfg;
  auto it = std::find_if(out.sections.begin(), out.sections.end(), [&](const auto& s) { return s.name == section; });
  if (it == out.sections.end()) throw ConfigError("unknown section '" + section + "'");
  out.sections.erase(it + 1, out.sections.end());
  return out;
}

ExperimentConfig identification_config(const ExperimentConfig& cfg) {
  ExperimentConfig out = truncated(cfg, cfg.identification.section);
  out.grid.thickness_nodes = cfg.identification.thickness_nodes;
  return out;
}

constexpr double report_interval = 50.0;

ChtcProfile section_profile(const ExperimentConfig& cfg, const std::string& section, double alpha_c, double alpha_p) {
  for (const auto& s : cfg.sections)
    if (s.name == section) return ChtcProfile{alpha_c, alpha_p, s.w, s.nozzles};
  throw ConfigError("unknown section '" + section + "'");
}

struct IdentificationRig {
  ExperimentConfig cfg;
  Machine truth;
  InteriorContext context;
  const SectionGrid* grid;
};

IdentificationRig make_rig(const ExperimentConfig& base, double alpha_c, double alpha_p, RunHealth& health) {
  ExperimentConfig cfg = identification_config(base);
  Machine truth(machine_config(cfg, alpha_c, alpha_p));
  run_audited(truth, cfg.identification.warmup, report_interval, health);
  // The context comes from a forward run with prior coefficients only.
  Machine model(machine_config(cfg, cfg.prior_alpha_c, cfg.prior_alpha_p));
  run_audited(model, cfg.identification.warmup, report_interval, health);
  InteriorContext ctx = interior_context(model, cfg.identification.section);
  IdentificationRig rig{cfg, std::move(truth), std::move(ctx), nullptr};
  rig.grid = &rig.truth.grids().section(cfg.identification.section);
  return rig;
}

SurfaceMeasurement measure(Machine& truth, const std::string& section, const NoiseSpec& noise, double sigma,
                           std::uint64_t seed) {
  SurfaceMeasurement m;
  m.inner = synthesize_measurements(truth, {section, Face::inner, {}, 0.0, 1}, noise.distribution, sigma, seed)
                .noisy.front();
  m.outer = synthesize_measurements(truth, {section, Face::outer, {}, 0.0, 1}, noise.distribution, sigma,
                                    seed ^ 0x9e3779b97f4a7c15ULL)
                .noisy.front();
  return m;
}

}  // namespace

MeasurementStream synthesize_measurements(Machine& truth, const SamplingPlan& plan, const std::string& distribution,
                                          double sigma, std::uint64_t seed) {
  NoiseSource noise(distribution, sigma, seed);
  if (plan.count < 1) throw ConfigError("sampling plan: count must be >= 1");
  const std::size_t k = truth.section_index(plan.section);
  MeasurementStream s;
  for (long c = 0; c < plan.count; ++c) {
    if (plan.interval > 0.0) truth.advance_section(k, plan.interval);
    std::vector<double> clean = face_values(truth, plan.section, plan.face, plan.nodes);
    std::vector<double> noisy = clean;
    for (double& v : noisy) v += noise();
    s.time.push_back(truth.time());
    s.clean.push_back(std::move(clean));
    s.noisy.push_back(std::move(noisy));
  }
  return s;
}

Identification identification_round_trip(const ExperimentConfig& cfg, double alpha_c, double alpha_p,
                                         RunHealth* health) {
  RunHealth local;
  IdentificationRig rig = make_rig(cfg, alpha_c, alpha_p, local);
  if (health) health->merge(local);
  const SurfaceMeasurement m = measure(rig.truth, rig.cfg.identification.section, rig.cfg.noise, 0.0, 0);
  return identify(rig.context, *rig.grid, m, rig.cfg.identification.face);
}

Identification identify_measured(const ExperimentConfig& base, const SurfaceMeasurement& measured,
                                 RunHealth* health) {
  const ExperimentConfig cfg = identification_config(base);
  RunHealth local;
  Machine model(machine_config(cfg, cfg.prior_alpha_c, cfg.prior_alpha_p));
  run_audited(model, cfg.identification.warmup, report_interval, local);
  if (health) health->merge(local);
  const InteriorContext ctx = interior_context(model, cfg.identification.section);
  return identify(ctx, model.grids().section(cfg.identification.section), measured, cfg.identification.face);
}

std::vector<double> identification_coords(const ExperimentConfig& base) {
  const ExperimentConfig cfg = identification_config(base);
  const MachineConfig mc = machine_config(cfg, cfg.prior_alpha_c, cfg.prior_alpha_p);
  const MachineGrids grids = build_grids(mc.layout, mc.grid);
  std::vector<double> out;
  for (const auto& s : grids.section(cfg.identification.section).surface) out.push_back(s.coord);
  return out;
}

Fig3Result run_fig3_experiment(const ExperimentConfig& base) {
  Fig3Result r;
  IdentificationRig rig = make_rig(base, base.truth_alpha_c, base.truth_alpha_p, r.health);
  const auto& cfg = rig.cfg;
  const auto& id_spec = cfg.identification;
  const Face face = id_spec.face;
  r.section = id_spec.section;
  r.alpha_c_true = cfg.truth_alpha_c;
  r.alpha_p_true = cfg.truth_alpha_p;
  const ChtcProfile truth_profile = section_profile(cfg, r.section, cfg.truth_alpha_c, cfg.truth_alpha_p);

  const SurfaceMeasurement clean = measure(rig.truth, r.section, cfg.noise, 0.0, 0);
  r.noiseless = identify(rig.context, *rig.grid, clean, face);
  r.noiseless_error_c = std::abs(r.noiseless.profile.alpha_c - r.alpha_c_true) / r.alpha_c_true;
  r.noiseless_error_p =
      r.alpha_p_true > 0.0 ? std::abs(r.noiseless.alpha_p_raw - r.alpha_p_true) / r.alpha_p_true : 0.0;

  InteriorContext warm = rig.context;
  warm.block = relax_interior(rig.context, clean);

  double sq = 0.0, spread = 0.0;
  SurfaceMeasurement first;
  Identification first_id;
  for (int s = 0; s < id_spec.seeds; ++s) {
    const SurfaceMeasurement noisy = measure(rig.truth, r.section, cfg.noise, cfg.noise.sigma, cfg.noise.seed + s);
    const Identification id = identify(warm, *rig.grid, noisy, face);
    r.lsq_alpha_c.push_back(id.profile.alpha_c);
    sq += std::pow(id.profile.alpha_c - r.alpha_c_true, 2);

    const DirectReversion dr = direct_reversion(id.samples);
    std::vector<double> dev;
    for (std::size_t i = 0; i < dr.alpha.size(); ++i) dev.push_back(dr.alpha[i] - truth_profile.alpha_at(dr.coord[i]));
    const double mean = std::accumulate(dev.begin(), dev.end(), 0.0) / static_cast<double>(dev.size());
    double var = 0.0;
    for (double d : dev) var += (d - mean) * (d - mean);
    spread += std::sqrt(var / static_cast<double>(dev.size() - 1));

    if (s == 0) {
      first = noisy;
      first_id = id;
      const ChtcProfile lsq = id.profile;
      for (std::size_t i = 0; i < id.samples.size(); ++i) {
        ProfileRecord pr;
        pr.coord = id.samples.coord[i];
        pr.membership = id.samples.membership[i];
        pr.truth = truth_profile.alpha_at(pr.coord);
        if (std::abs(id.samples.q[i]) >= min_abs_q) pr.direct = id.samples.p[i] / id.samples.q[i];
        pr.lsq = lsq.alpha_at(pr.coord);
        r.profile.push_back(pr);
      }
    }
  }
  r.lsq_rms_error = std::sqrt(sq / id_spec.seeds);
  r.direct_spread = spread / id_spec.seeds;
  r.spread_ratio = r.lsq_rms_error > 0.0 ? r.direct_spread / r.lsq_rms_error : INFINITY;

  // Outliers on a few surface nodes of the identified face.
  SurfaceMeasurement bad = first;
  auto& values = face == Face::inner ? bad.inner : bad.outer;
  const std::size_t n_out =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(id_spec.outlier_fraction * values.size())));
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 pick(cfg.noise.seed + 7919);
  std::shuffle(order.begin(), order.end(), pick);
  for (std::size_t i = 0; i < n_out; ++i) values[order[i]] += id_spec.outlier_magnitude;
  const Identification with_outliers = identify(warm, *rig.grid, bad, face);
  r.outlier_shift = std::abs(with_outliers.profile.alpha_c - first_id.profile.alpha_c);
  double max_ratio = 0.0;
  for (std::size_t i = 0; i < with_outliers.samples.size(); ++i)
    if (std::abs(with_outliers.samples.q[i]) >= min_abs_q)
      max_ratio = std::max(max_ratio, std::abs(with_outliers.samples.p[i] / with_outliers.samples.q[i]));
  r.outlier_bound = static_cast<double>(n_out) / static_cast<double>(values.size()) * max_ratio;
  return r;
}

double error_after(const TuningResult& r, double alpha_true, long j) {
  const long n = static_cast<long>(r.trajectory.size());
  const double a = j < n ? r.trajectory[static_cast<std::size_t>(j)].alpha : r.last_iterate;
  return std::abs(a - alpha_true) / alpha_true;
}

SweepMetrics sweep_metrics(const TuningResult& r, double alpha_true, double alpha0) {
  SweepMetrics m;
  const long n = static_cast<long>(r.trajectory.size());
  long last_bad = -1;
  for (long j = 0; j <= n; ++j)
    if (error_after(r, alpha_true, j) > 0.05) last_bad = j;
  if (last_bad < n) m.iterations_to_5pct = last_bad + 1;
  m.error_at_20 = error_after(r, alpha_true, 20);
  m.error_at_100 = error_after(r, alpha_true, 100);
  m.error_at_200 = error_after(r, alpha_true, 200);
  m.final_error = error_after(r, alpha_true, n);
  const double dir = alpha_true >= alpha0 ? 1.0 : -1.0;
  for (long j = 0; j <= n; ++j) {
    const double a = j < n ? r.trajectory[static_cast<std::size_t>(j)].alpha : r.last_iterate;
    m.max_overshoot = std::max(m.max_overshoot, (a - alpha_true) * dir / alpha_true);
  }
  for (std::size_t i = 1; i < r.trajectory.size(); ++i)
    if (!(r.trajectory[i - 1].residual * r.trajectory[i].residual > 0.0)) ++m.sign_alternations;
  return m;
}

namespace {

class MachineTunable : public TunableModel {
 public:
  MachineTunable(Machine m, std::string section, Face face, int node, double interval)
      : machine(std::move(m)), section_(std::move(section)), face_(face), node_(node), interval_(interval) {
    index_ = machine.section_index(section_);
  }
  double advance(double alpha_c) override {
    machine.set_alpha_c(section_, face_, alpha_c);
    machine.advance_section(index_, interval_);
    const ThermalBlock& b = machine.section_block(index_);
    return b.T(face_ == Face::inner ? 0 : b.ni() - 1, node_);
  }
  Machine machine;

 private:
  std::string section_;
  Face face_;
  int node_;
  double interval_;
  std::size_t index_ = 0;
};

}  // namespace

TuningBench::TuningBench(const ExperimentConfig& cfg) : cfg_(truncated(cfg, cfg.tuning.section)) {
  const auto& t = cfg_.tuning;
  Machine truth(machine_config(cfg_, cfg_.truth_alpha_c, cfg_.truth_alpha_p));
  section_ = truth.section_index(t.section);
  const SectionGrid& g = truth.grids().sections[section_];
  const double target = t.coord ? *t.coord : 0.5 * (g.along.front() + g.along.back());
  double best = INFINITY;
  for (std::size_t j = 0; j < g.surface.size(); ++j) {
    if (!t.coord && g.surface[j].membership != Membership::K) continue;
    const double d = std::abs(g.surface[j].coord - target);
    if (d < best - 1e-12) {
      best = d;
      node_ = static_cast<int>(j);
    }
  }
  if (!std::isfinite(best)) throw DegenerateDataError(t.section + ": no nozzle-free surface node to measure at");
  coord_ = g.surface[static_cast<std::size_t>(node_)].coord;
  run_audited(truth, t.warmup, report_interval, health_);
  stream_ = synthesize_measurements(truth, {t.section, t.face, {node_}, t.interval, t.iterations},
                                    cfg_.noise.distribution, cfg_.noise.sigma_tuning, cfg_.noise.seed);
  health_.absorb(truth);
}

const Machine& TuningBench::model_for(double alpha0) {
  for (const auto& [a, m] : models_)
    if (a == alpha0) return m;
  Machine m(machine_config(cfg_, cfg_.truth_alpha_c, cfg_.truth_alpha_p));
  m.set_alpha_c(cfg_.tuning.section, cfg_.tuning.face, alpha0);
  run_audited(m, cfg_.tuning.warmup, report_interval, health_);
  models_.emplace_back(alpha0, std::move(m));
  return models_.back().second;
}

SweepRecord TuningBench::run(const SweepCell& cell, bool stop_on_accept) {
  const auto& t = cfg_.tuning;
  SweepRecord rec;
  rec.cell = cell;
  rec.alpha_true = cfg_.truth_alpha_c;
  rec.alpha0 = (cell.initial_factor > 0.0 ? cell.initial_factor : t.initial_factor) * rec.alpha_true;
  MachineTunable model(model_for(rec.alpha0), t.section, t.face, node_, t.interval);
  TuningLimits limits;
  limits.max_iterations = t.iterations;
  limits.eps_rel = t.eps_rel;
  limits.m = t.m;
  limits.stop_on_accept = stop_on_accept;
  auto source = [this](long j) { return stream_.noisy.at(static_cast<std::size_t>(j - 1)).front(); };
  rec.result = run_tuning(model, source, StepSequence{cell.kind, cell.a, cell.b}, rec.alpha0, limits);
  rec.metrics = sweep_metrics(rec.result, rec.alpha_true, rec.alpha0);
  health_.absorb(model.machine);
  return rec;
}

SweepResult run_fig4_7_sweeps(const ExperimentConfig& cfg, std::span<const SweepCell> cells) {
  TuningBench bench(cfg);
  SweepResult out;
  out.measurement_coord = bench.coord();
  for (const auto& c : cells) out.records.push_back(bench.run(c));
  out.health = bench.health();
  return out;
}

std::string cell_id(const SweepCell& c) {
  auto num = [](double v) {
    std::string s = fmt::format("{:g}", v);
    std::replace(s.begin(), s.end(), '.', 'p');
    std::replace(s.begin(), s.end(), '-', 'm');
    return s;
  };
  std::string id = fmt::format("{}_a{}_b{}", to_string(c.kind), num(c.a), num(c.b));
  if (c.initial_factor > 0.0) id += "_x" + num(c.initial_factor);
  return id;
}

namespace {

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + p.string());
  return f;
}

std::string opt(const std::optional<long>& v) { return v ? std::to_string(*v) : std::string(); }

}  // namespace

void write_fig3_outputs(const std::filesystem::path& dir, const Fig3Result& r) {
  std::filesystem::create_directories(dir);
  {
    auto f = open_out(dir / "fig3_profile.csv");
    f << "coord,membership,truth,direct,lsq\n";
    for (const auto& p : r.profile)
      fmt::print(f, "{:.10g},{},{:.10g},{},{:.10g}\n", p.coord, p.membership == Membership::K ? "K" : "B", p.truth,
                 p.direct ? fmt::format("{:.10g}", *p.direct) : std::string(), p.lsq);
  }
  {
    auto f = open_out(dir / "fig3_noiseless_report.csv");
    write_identification_report(f, r.noiseless);
  }
  auto f = open_out(dir / "fig3_summary.csv");
  f << "key,value\n";
  fmt::print(f, "section,{}\nalpha_c_true,{:.10g}\nalpha_p_true,{:.10g}\n", r.section, r.alpha_c_true, r.alpha_p_true);
  fmt::print(f, "noiseless_alpha_c,{:.10g}\nnoiseless_alpha_p,{:.10g}\n", r.noiseless.profile.alpha_c,
             r.noiseless.alpha_p_raw);
  fmt::print(f, "noiseless_error_c,{:.6e}\nnoiseless_error_p,{:.6e}\n", r.noiseless_error_c, r.noiseless_error_p);
  fmt::print(f, "seeds,{}\nlsq_rms_error,{:.10g}\ndirect_spread,{:.10g}\nspread_ratio,{:.10g}\n", r.lsq_alpha_c.size(),
             r.lsq_rms_error, r.direct_spread, r.spread_ratio);
  fmt::print(f, "outlier_shift,{:.10g}\noutlier_bound,{:.10g}\noutlier_within_bound,{}\n", r.outlier_shift,
             r.outlier_bound, r.outlier_shift < r.outlier_bound ? "true" : "false");
  fmt::print(f, "worst_energy_error,{:.6e}\nbound_violations,{}\n", r.health.worst_energy_error,
             r.health.bound_violations);
}

void write_sweep_outputs(const std::filesystem::path& dir, const SweepResult& r) {
  std::filesystem::create_directories(dir);
  auto summary = open_out(dir / "sweep_summary.csv");
  summary << "cell,seq,a,b,alpha0,alpha_true,status,final_alpha,iterations,iter_to_5pct,err20,err100,err200,"
             "max_overshoot,sign_alternations,stop_rule_iteration\n";
  for (const auto& rec : r.records) {
    const std::string id = cell_id(rec.cell);
    {
      auto f = open_out(dir / ("traj_" + id + ".csv"));
      write_trajectory_csv(f, rec.result);
    }
    {
      auto f = open_out(dir / ("status_" + id + ".csv"));
      write_status_block(f, rec.result);
    }
    const auto& m = rec.metrics;
    fmt::print(summary, "{},{},{:g},{:g},{:.10g},{:.10g},{},{:.10g},{},{},{:.6e},{:.6e},{:.6e},{:.6e},{},{}\n", id,
               to_string(rec.cell.kind), rec.cell.a, rec.cell.b, rec.alpha0, rec.alpha_true,
               to_string(rec.result.status), rec.result.final_alpha, rec.result.iterations, opt(m.iterations_to_5pct),
               m.error_at_20, m.error_at_100, m.error_at_200, m.max_overshoot, m.sign_alternations,
               opt(rec.result.accept_iteration));
  }
}

void emit_plots(const std::filesystem::path& dir, const Fig3Result* fig3, const SweepResult* sweep) {
  std::filesystem::create_directories(dir);
  if (fig3) {
    PlotSpec p;
    p.title = "CHTC profile: direct reversion vs least squares";
    p.x_label = "surface coordinate";
    p.y_label = "alpha, W/(m^2 K)";
    PlotSeries truth{"truth", {}, {}, false}, direct{"direct reversion", {}, {}, true}, lsq{"least squares", {}, {}, false};
    for (const auto& r : fig3->profile) {
      truth.x.push_back(r.coord);
      truth.y.push_back(r.truth);
      lsq.x.push_back(r.coord);
      lsq.y.push_back(r.lsq);
      if (r.direct) {
        direct.x.push_back(r.coord);
        direct.y.push_back(*r.direct);
      }
    }
    p.series = {truth, direct, lsq};
    write_svg(dir / "fig3_profile.svg", p);
  }
  if (!sweep) return;
  struct Group {
    std::string file, title;
    std::function<bool(const SweepCell&)> accept;
    std::function<std::string(const SweepCell&)> label;
  };
  const std::vector<Group> groups = {
      {"fig4_harmonic_a.svg", "Harmonic k = a/j",
       [](const SweepCell& c) { return c.kind == SequenceKind::harmonic && c.b == 0.0 && c.initial_factor == 0.0; },
       [](const SweepCell& c) { return fmt::format("a = {:g}", c.a); }},
      {"fig5_harmonic_b.svg", "Harmonic k = a/(b + j)",
       [](const SweepCell& c) { return c.kind == SequenceKind::harmonic && c.a == 1.0 && c.initial_factor == 0.0; },
       [](const SweepCell& c) { return fmt::format("b = {:g}", c.b); }},
      {"fig6_sign_reset.svg", "Sign-reset sequence",
       [](const SweepCell& c) { return c.kind == SequenceKind::sign_reset && c.initial_factor == 0.0; },
       [](const SweepCell& c) { return fmt::format("a = {:g}", c.a); }},
      {"fig7_sign_increment.svg", "Sign-increment sequence",
       [](const SweepCell& c) { return c.kind == SequenceKind::sign_increment && c.initial_factor == 0.0; },
       [](const SweepCell& c) { return fmt::format("a = {:g}", c.a); }},
      {"basin.svg", "Initial-value basin",
       [](const SweepCell& c) { return c.initial_factor > 0.0; },
       [](const SweepCell& c) { return fmt::format("x{:g} {} a={:g}", c.initial_factor, to_string(c.kind), c.a); }},
  };
  for (const auto& g : groups) {
    PlotSpec p;
    p.title = g.title;
    p.x_label = "iteration j";
    p.y_label = "alpha_c, W/(m^2 K)";
    for (const auto& rec : sweep->records) {
      if (!g.accept(rec.cell)) continue;
      PlotSeries s{g.label(rec.cell), {}, {}, false};
      const auto& tr = rec.result.trajectory;
      for (std::size_t j = 0; j <= tr.size(); ++j) {
        s.x.push_back(static_cast<double>(j));
        s.y.push_back(j < tr.size() ? tr[j].alpha : rec.result.last_iterate);
      }
      p.series.push_back(std::move(s));
      p.reference = rec.alpha_true;
    }
    if (!p.series.empty()) write_svg(dir / g.file, p);
  }
}

}  // namespace ccm
