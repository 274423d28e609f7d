#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "ccm/config.hpp"
#include "ccm/errors.hpp"
#include "ccm/harness.hpp"
#include "ccm/ident_lsq.hpp"
#include "ccm/ident_sa.hpp"

namespace fs = std::filesystem;
using namespace ccm;

namespace {

enum ExitCode { ok = 0, config_error = 2, numeric_error = 3, degenerate_data = 4 };

ExperimentConfig load(const std::string& path) {
  if (path.empty()) return default_experiment();
  return load_experiment(path);
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p);
  if (!f) throw ConfigError("cannot write " + p.string());
  return f;
}

void write_resolved(const fs::path& dir, const ExperimentConfig& cfg) {
  fs::create_directories(dir);
  open_out(dir / "resolved_config.yaml") << dump_experiment(cfg);
}

void write_surface_csv(std::ostream& out, const Machine& m) {
  out << "section,face,coord,T\n";
  for (const auto& g : m.grids().sections)
    for (Face face : {Face::inner, Face::outer})
      for (const auto& s : m.surface_temperature_profile(g.name, face))
        out << fmt::format("{},{},{:.17g},{:.17g}\n", g.name, face == Face::inner ? "inner" : "outer", s.coord, s.t);
}

int simulate(const ExperimentConfig& cfg, const fs::path& out, double t_end) {
  write_resolved(out, cfg);
  Machine m(machine_config(cfg, cfg.truth_alpha_c, cfg.truth_alpha_p));
  RunHealth health;
  run_audited(m, t_end, 50.0, health);
  health.absorb(m);
  auto field = open_out(out / "field.csv");
  m.write_field_csv(field);
  auto front = open_out(out / "front.csv");
  m.write_front_csv(front);
  auto surface = open_out(out / "surface.csv");
  write_surface_csv(surface, m);
  std::printf("t = %.1f s, worst audit error %.2e, bound violations %ld\n", m.time(), health.worst_energy_error,
              health.bound_violations);
  return ok;
}

SurfaceMeasurement read_measurements(const fs::path& path, const ExperimentConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read measurements " + path.string());
  const std::vector<double> coords = identification_coords(cfg);
  const double span = std::abs(coords.back() - coords.front());
  std::map<Face, std::vector<double>> values;
  std::map<Face, std::vector<int>> seen;
  for (Face f : {Face::inner, Face::outer}) {
    values[f].assign(coords.size(), NAN);
    seen[f].assign(coords.size(), 0);
  }
  std::string line;
  long row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line.rfind("section", 0) == 0) continue;
    std::stringstream ss(line);
    std::string section, face, coord, t;
    if (!std::getline(ss, section, ',') || !std::getline(ss, face, ',') || !std::getline(ss, coord, ',') ||
        !std::getline(ss, t))
      throw ConfigError(fmt::format("{}:{}: expected section,face,coord,T", path.string(), row));
    if (section != cfg.identification.section) continue;
    Face f;
    if (face == "inner")
      f = Face::inner;
    else if (face == "outer")
      f = Face::outer;
    else
      throw ConfigError(fmt::format("{}:{}: face must be inner or outer", path.string(), row));
    double c, v;
    try {
      c = std::stod(coord);
      v = std::stod(t);
    } catch (const std::exception&) {
      throw ConfigError(fmt::format("{}:{}: bad number", path.string(), row));
    }
    std::size_t best = 0;
    for (std::size_t k = 1; k < coords.size(); ++k)
      if (std::abs(coords[k] - c) < std::abs(coords[best] - c)) best = k;
    if (std::abs(coords[best] - c) > 1e-6 * span)
      throw ConfigError(fmt::format("{}:{}: coordinate {} is not a grid node of {}", path.string(), row, c, section));
    values[f][best] = v;
    seen[f][best] = 1;
  }
  for (Face f : {Face::inner, Face::outer})
    for (std::size_t k = 0; k < coords.size(); ++k)
      if (!seen[f][k])
        throw ConfigError(fmt::format("measurements: {} face of {} missing node at {}",
                                      f == Face::inner ? "inner" : "outer", cfg.identification.section, coords[k]));
  return {values[Face::inner], values[Face::outer]};
}

int identify_cmd(const ExperimentConfig& cfg, const fs::path& measurements, const fs::path& out) {
  write_resolved(out, cfg);
  const SurfaceMeasurement m = read_measurements(measurements, cfg);
  const Identification id = identify_measured(cfg, m);
  auto report = open_out(out / "identification.csv");
  write_identification_report(report, id);
  std::printf("alpha_c %.4f alpha_p %.4f (raw %.4f)%s\n", id.profile.alpha_c, id.profile.alpha_p, id.alpha_p_raw,
              id.no_enhancement ? " no_enhancement" : "");
  return ok;
}

int tune_cmd(ExperimentConfig cfg, const std::string& seq, double a, double b, const fs::path& out) {
  const SweepCell cell{parse_sequence(seq), a, b, 0.0};
  StepSequence{cell.kind, cell.a, cell.b}.validate();
  write_resolved(out, cfg);
  TuningBench bench(cfg);
  const SweepRecord r = bench.run(cell, true);
  auto traj = open_out(out / "trajectory.csv");
  write_trajectory_csv(traj, r.result);
  auto status = open_out(out / "status.csv");
  write_status_block(status, r.result);
  std::printf("%s: alpha %.4f after %ld iterations (truth %.4f)\n", to_string(r.result.status).c_str(),
              r.result.final_alpha, r.result.iterations, r.alpha_true);
  return ok;
}

int sweep_cmd(const ExperimentConfig& cfg, const std::string& grid, const fs::path& out) {
  const std::vector<SweepCell> cells = grid.empty() ? cfg.sweep : load_sweep_grid(grid);
  if (cells.empty()) throw ConfigError("sweep: no cells");
  for (const auto& c : cells) StepSequence{c.kind, c.a, c.b}.validate();
  write_resolved(out, cfg);
  const SweepResult r = run_fig4_7_sweeps(cfg, cells);
  write_sweep_outputs(out, r);
  emit_plots(out, nullptr, &r);
  for (const auto& rec : r.records)
    std::printf("%-28s err@20 %6.2f%% err@100 %6.2f%% err@200 %6.2f%%\n", cell_id(rec.cell).c_str(),
                100 * rec.metrics.error_at_20, 100 * rec.metrics.error_at_100, 100 * rec.metrics.error_at_200);
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CCM ingot thermal simulator and CHTC identification"};
  app.require_subcommand(1);
  std::string config, out;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "experiment YAML (defaults when omitted)");
    sub->add_option("--out", out, "output directory (default: output_dir of the config)");
  };

  double t_end = 600.0;
  auto* sim = app.add_subcommand("simulate", "forward run with field and front CSV export");
  common(sim);
  sim->add_option("--time", t_end, "model time [s]")->check(CLI::PositiveNumber);

  std::string measurements;
  auto* ident = app.add_subcommand("identify", "least-squares CHTC profile from surface temperatures");
  common(ident);
  ident->add_option("--measurements", measurements, "CSV with section,face,coord,T")->required();

  std::string seq = "harmonic";
  double a = 1.0, b = 0.0;
  auto* tune = app.add_subcommand("tune", "stochastic-approximation tuning of alpha_c");
  common(tune);
  tune->add_option("--seq", seq, "harmonic | sign-reset | sign-increment");
  tune->add_option("--a", a, "step-size gain");
  tune->add_option("--b", b, "harmonic offset");

  std::string grid;
  auto* sweep = app.add_subcommand("sweep", "step-size parameter sweeps");
  common(sweep);
  sweep->add_option("--grid", grid, "YAML list of sweep cells (default: sweep of the config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : config_error;
  }

  try {
    const ExperimentConfig cfg = load(config);
    const fs::path dir = out.empty() ? fs::path(cfg.output_dir) : fs::path(out);
    if (*sim) return simulate(cfg, dir, t_end);
    if (*ident) return identify_cmd(cfg, measurements, dir);
    if (*tune) return tune_cmd(cfg, seq, a, b, dir);
    return sweep_cmd(cfg, grid, dir);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return config_error;
  } catch (const DegenerateDataError& e) {
    std::fprintf(stderr, "degenerate data: %s\n", e.what());
    return degenerate_data;
  } catch (const NumericError& e) {
    std::fprintf(stderr, "numeric failure: %s\n", e.what());
    return numeric_error;
  } catch (const DomainError& e) {
    std::fprintf(stderr, "numeric failure: %s\n", e.what());
    return numeric_error;
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return config_error;
  }
}
