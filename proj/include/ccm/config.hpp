#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ccm/ident_sa.hpp"
#include "ccm/solver.hpp"

namespace ccm {

struct SectionSpec {
  std::string name;
  SectionKind kind = SectionKind::curvilinear;
  double r_m = 4.0;        // curvilinear
  double phi_span = 0.6;   // curvilinear
  double z_p = 0.0;        // rectilinear
  double x_f = 4.0;        // rectilinear
  std::vector<double> nozzles;
  double w = 0.05;
  int nodes = 121;
  FaceEnvironment inner, outer;
};

struct NoiseSpec {
  std::string distribution = "gaussian";  // gaussian | uniform (same sigma)
  double sigma = 5.0;                     // surface profile experiments [K]
  double sigma_tuning = 3.0;              // operative tuning experiments [K]
  std::uint64_t seed = 20240917;
};

struct IdentificationSpec {
  std::string section = "curv1";
  Face face = Face::inner;
  double warmup = 400.0;  // s of model time before the snapshot
  int thickness_nodes = 141;  // across-grid of identification runs (stencil resolution)
  int seeds = 100;
  double outlier_fraction = 0.05;
  double outlier_magnitude = 200.0;
};

struct TuningSpec {
  std::string section = "curv1";
  Face face = Face::inner;
  std::optional<double> coord;  // measurement point; default nearest K node to mid-section
  double interval = 60.0;       // s between measurements
  long iterations = 300;
  double initial_factor = 1.3;  // initial alpha_c = factor * truth
  double eps_rel = 0.005;
  int m = 10;
  double warmup = 400.0;
};

struct SweepCell {
  SequenceKind kind = SequenceKind::harmonic;
  double a = 1.0;
  double b = 0.0;
  double initial_factor = 0.0;  // 0 = tuning.initial_factor
};

struct ExperimentConfig {
  // machine
  MouldGeometry mould;
  WallProperties wall;
  MouldEnvironment mould_env;
  WaterChannel water;
  std::vector<SectionSpec> sections;
  GridSpec grid;
  double casting_speed = 1.0 / 60.0;  // m/s
  double pour_temperature = 1800.0;
  double initial_strand_temperature = 1800.0;
  double initial_wall_temperature = 303.0;
  kernels::Backend backend = kernels::Backend::serial;
  std::string material = "st40";  // built-in grade or a material YAML path

  // experiment
  double truth_alpha_c = 250.0, truth_alpha_p = 750.0;
  double prior_alpha_c = 200.0, prior_alpha_p = 500.0;
  NoiseSpec noise;
  IdentificationSpec identification;
  TuningSpec tuning;
  std::vector<SweepCell> sweep;
  std::string output_dir = "out";

  void validate() const;
};

ExperimentConfig default_experiment();
/// Defaults overlaid by the keys present in the file. Throws ConfigError.
ExperimentConfig load_experiment(const std::filesystem::path& path);
std::string dump_experiment(const ExperimentConfig& cfg);
/// Sweep cells from a grid file: `cells: [{seq, a, b, initial_factor}]`.
std::vector<SweepCell> load_sweep_grid(const std::filesystem::path& path);

std::shared_ptr<const MaterialProperties> resolve_material(const std::string& ref);

/// Machine with the given (alpha_c, alpha_p) on every face of every section.
MachineConfig machine_config(const ExperimentConfig& cfg, double alpha_c, double alpha_p);

}  // namespace ccm
