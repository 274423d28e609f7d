#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "ccm/config.hpp"
#include "ccm/ident_lsq.hpp"
#include "ccm/ident_sa.hpp"
#include "ccm/solver.hpp"

namespace ccm {

/// Conservation and maximum-principle record of the forward runs of an experiment.
struct RunHealth {
  double worst_energy_error = 0.0;  // max relative audit error over reporting intervals
  int intervals = 0;
  long bound_violations = 0;
  double worst_bound_excess = 0.0;
  long smear_warnings = 0;

  void merge(const RunHealth& other);
  void absorb(const Machine& m);
};

/// Runs to t_end, auditing energy every `report` seconds of model time.
void run_audited(Machine& m, double t_end, double report, RunHealth& health);

/// Zero-mean telemetry noise; gaussian or uniform with the same sigma.
class NoiseSource {
 public:
  NoiseSource(const std::string& distribution, double sigma, std::uint64_t seed);
  double operator()();

 private:
  bool uniform_;
  double sigma_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> flat_{-1.0, 1.0};
};

struct SamplingPlan {
  std::string section;
  Face face = Face::inner;
  std::vector<int> nodes;  // along indices on the face; empty = every node
  double interval = 0.0;   // 0 = single snapshot of the current state
  long count = 1;
};

struct MeasurementStream {
  std::vector<double> time;
  std::vector<std::vector<double>> clean;  // per sample, per node
  std::vector<std::vector<double>> noisy;
};

/// Taps the truth machine at equal intervals (section-only stepping, the
/// upstream regions being steady) and adds seeded noise.
MeasurementStream synthesize_measurements(Machine& truth, const SamplingPlan& plan, const std::string& distribution,
                                          double sigma, std::uint64_t seed);

struct ProfileRecord {
  double coord = 0.0;
  Membership membership = Membership::K;
  double truth = 0.0;
  std::optional<double> direct;  // noisy, first seed
  double lsq = 0.0;              // profile identified from the first seed
};

struct Fig3Result {
  std::string section;
  double alpha_c_true = 0.0, alpha_p_true = 0.0;
  Identification noiseless;
  double noiseless_error_c = 0.0, noiseless_error_p = 0.0;  // relative
  std::vector<double> lsq_alpha_c;                          // per seed
  double lsq_rms_error = 0.0;                               // W/(m^2 K)
  double direct_spread = 0.0;  // mean over seeds of std(alpha_i - alpha_true(y_i))
  double spread_ratio = 0.0;
  std::vector<ProfileRecord> profile;
  double outlier_shift = 0.0, outlier_bound = 0.0;
  RunHealth health;
};

/// Per-node direct reversion against least squares on noisy surface data.
Fig3Result run_fig3_experiment(const ExperimentConfig& cfg);

/// Round trip for an arbitrary truth profile on the identification grid.
Identification identification_round_trip(const ExperimentConfig& cfg, double alpha_c, double alpha_p,
                                         RunHealth* health = nullptr);

/// LSQ identification of given surface temperatures against a warmed prior model.
Identification identify_measured(const ExperimentConfig& cfg, const SurfaceMeasurement& measured,
                                 RunHealth* health = nullptr);

/// Along-coordinates of the identification grid of the configured section.
std::vector<double> identification_coords(const ExperimentConfig& cfg);

struct SweepMetrics {
  std::optional<long> iterations_to_5pct;  // first j after which every iterate is within 5 %
  double error_at_20 = 0.0, error_at_100 = 0.0, error_at_200 = 0.0, final_error = 0.0;  // relative
  double max_overshoot = 0.0;  // largest excursion past the truth, relative
  long sign_alternations = 0;  // residual sign changes
};

SweepMetrics sweep_metrics(const TuningResult& r, double alpha_true, double alpha0);
/// Relative error of the iterate after j updates.
double error_after(const TuningResult& r, double alpha_true, long j);

struct SweepRecord {
  SweepCell cell;
  double alpha_true = 0.0, alpha0 = 0.0;
  TuningResult result;
  SweepMetrics metrics;
};

/// Warmed-up truth and measurement stream shared by tuning runs.
class TuningBench {
 public:
  explicit TuningBench(const ExperimentConfig& cfg);

  double alpha_true() const { return cfg_.truth_alpha_c; }
  int node() const { return node_; }
  double coord() const { return coord_; }
  const MeasurementStream& stream() const { return stream_; }
  RunHealth& health() { return health_; }

  /// Fixed-horizon run unless stop_on_accept.
  SweepRecord run(const SweepCell& cell, bool stop_on_accept = false);

 private:
  const Machine& model_for(double alpha0);

  ExperimentConfig cfg_;
  std::size_t section_ = 0;
  int node_ = 0;
  double coord_ = 0.0;
  MeasurementStream stream_;
  std::vector<std::pair<double, Machine>> models_;
  RunHealth health_;
};

struct SweepResult {
  std::vector<SweepRecord> records;
  double measurement_coord = 0.0;
  RunHealth health;
};

SweepResult run_fig4_7_sweeps(const ExperimentConfig& cfg, std::span<const SweepCell> cells);

void write_fig3_outputs(const std::filesystem::path& dir, const Fig3Result& r);
void write_sweep_outputs(const std::filesystem::path& dir, const SweepResult& r);
/// SVG figures for whatever records are given.
void emit_plots(const std::filesystem::path& dir, const Fig3Result* fig3, const SweepResult* sweep);

std::string cell_id(const SweepCell& c);

}  // namespace ccm
