#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ccm/errors.hpp"
#include "ccm/harness.hpp"

using namespace ccm;
namespace fs = std::filesystem;

namespace {

ExperimentConfig coarse() {
  ExperimentConfig cfg = default_experiment();
  cfg.sections[0].nodes = 61;
  return cfg;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

TuningResult synthetic_run(std::initializer_list<double> alphas, std::initializer_list<double> residuals, double last) {
  TuningResult r;
  long j = 1;
  auto res = residuals.begin();
  for (double a : alphas) r.trajectory.push_back({j++, a, 1.0, *res++, 1});
  r.last_iterate = last;
  r.iterations = static_cast<long>(r.trajectory.size());
  return r;
}

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("noise moments") {
    for (const char* dist : {"gaussian", "uniform"}) {
      NoiseSource n(dist, 3.0, 42);
      const int count = 200000;
      double sum = 0.0, sq = 0.0, worst = 0.0;
      for (int i = 0; i < count; ++i) {
        const double v = n();
        sum += v;
        sq += v * v;
        worst = std::max(worst, std::abs(v));
      }
      const double mean = sum / count, sd = std::sqrt(sq / count - mean * mean);
      CHECK(std::abs(mean) < 4.0 * 3.0 / std::sqrt(count));
      CHECK(sd == doctest::Approx(3.0).epsilon(0.01));
      if (std::string(dist) == "uniform") CHECK(worst <= std::sqrt(3.0) * 3.0);
    }
  }

  TEST_CASE("noise is seeded") {
    NoiseSource a("gaussian", 5.0, 9), b("gaussian", 5.0, 9), c("gaussian", 5.0, 10);
    bool differs = false;
    for (int i = 0; i < 100; ++i) {
      const double x = a(), y = b(), z = c();
      CHECK(x == y);
      differs = differs || x != z;
    }
    CHECK(differs);
    NoiseSource silent("uniform", 0.0, 1);
    CHECK(silent() == 0.0);
    CHECK_THROWS_AS(NoiseSource("gaussian", -1.0, 1), ConfigError);
    CHECK_THROWS_AS(NoiseSource("cauchy", 1.0, 1), ConfigError);
  }

  TEST_CASE("cell ids") {
    CHECK(cell_id({SequenceKind::harmonic, 1.0, 0.0, 0.0}) == "harmonic_a1_b0");
    CHECK(cell_id({SequenceKind::sign_increment, 1.35, 0.0, 0.0}) == "sign-increment_a1p35_b0");
    CHECK(cell_id({SequenceKind::harmonic, 1.0, 10.0, 2.0}) == "harmonic_a1_b10_x2");
  }

  TEST_CASE("sweep metrics") {
    // Truth 100, start 130: iterates 130, 90, 104, 98 then 101.
    const TuningResult r = synthetic_run({130, 90, 104, 98}, {5, -2, 1, 0}, 101);
    CHECK(error_after(r, 100.0, 0) == doctest::Approx(0.3));
    CHECK(error_after(r, 100.0, 1) == doctest::Approx(0.1));
    CHECK(error_after(r, 100.0, 4) == doctest::Approx(0.01));
    CHECK(error_after(r, 100.0, 50) == doctest::Approx(0.01));
    const SweepMetrics m = sweep_metrics(r, 100.0, 130.0);
    REQUIRE(m.iterations_to_5pct);
    CHECK(*m.iterations_to_5pct == 2);
    CHECK(m.max_overshoot == doctest::Approx(0.1));
    CHECK(m.sign_alternations == 3);
    CHECK(m.final_error == doctest::Approx(0.01));
    const SweepMetrics never = sweep_metrics(synthetic_run({130, 120}, {1, 1}, 110), 100.0, 130.0);
    CHECK_FALSE(never.iterations_to_5pct);
    CHECK(never.max_overshoot == 0.0);
  }

  TEST_CASE("synthetic measurements") {
    ExperimentConfig cfg = coarse();
    Machine truth(machine_config(cfg, 250.0, 750.0));
    truth.advance(5.0);
    Machine copy = truth;
    const SamplingPlan plan{"curv1", Face::inner, {3, 10}, 2.0, 3};
    const MeasurementStream s = synthesize_measurements(truth, plan, "gaussian", 0.0, 1);
    REQUIRE(s.time.size() == 3);
    CHECK(s.time[1] - s.time[0] == doctest::Approx(2.0));
    CHECK(s.clean[0].size() == 2);
    CHECK(s.noisy == s.clean);
    const MeasurementStream noisy = synthesize_measurements(copy, plan, "gaussian", 3.0, 1);
    CHECK(noisy.clean == s.clean);
    CHECK(noisy.noisy != noisy.clean);
    CHECK_THROWS_AS(synthesize_measurements(copy, {"curv1", Face::inner, {}, 0.0, 0}, "gaussian", 1.0, 1), ConfigError);
    CHECK_THROWS(synthesize_measurements(copy, {"nowhere", Face::inner, {}, 0.0, 1}, "gaussian", 1.0, 1));
  }

  TEST_CASE("noiseless round trip on a coarse grid") {
    const ExperimentConfig cfg = coarse();
    RunHealth health;
    const Identification id = identification_round_trip(cfg, 250.0, 750.0, &health);
    CHECK(std::abs(id.profile.alpha_c - 250.0) / 250.0 < 0.03);
    CHECK(std::abs(id.profile.alpha_p - 750.0) / 750.0 < 0.03);
    CHECK(health.bound_violations == 0);
    CHECK(health.worst_energy_error < 0.005);

    const Identification flat = identification_round_trip(cfg, 250.0, 0.0);
    CHECK(flat.no_enhancement);
    CHECK(std::abs(flat.profile.alpha_c - 250.0) / 250.0 < 0.03);
  }

  TEST_CASE("sweep outputs are byte-identical across runs") {
    SweepResult sr;
    SweepRecord rec;
    rec.cell = {SequenceKind::harmonic, 1.0, 0.0, 0.0};
    rec.alpha_true = 100.0;
    rec.alpha0 = 130.0;
    rec.result = synthetic_run({130, 90, 104, 98}, {5, -2, 1, 0}, 101);
    rec.metrics = sweep_metrics(rec.result, 100.0, 130.0);
    sr.records = {rec};
    const fs::path base = fs::temp_directory_path() / "ccm_harness_test";
    fs::remove_all(base);
    write_sweep_outputs(base / "a", sr);
    write_sweep_outputs(base / "b", sr);
    for (const char* f : {"sweep_summary.csv", "traj_harmonic_a1_b0.csv", "status_harmonic_a1_b0.csv"}) {
      CHECK(fs::exists(base / "a" / f));
      CHECK(slurp(base / "a" / f) == slurp(base / "b" / f));
    }
    CHECK(slurp(base / "a" / "sweep_summary.csv").rfind("cell,seq,a,b,", 0) == 0);
    emit_plots(base / "plots", nullptr, &sr);
    bool any_svg = false;
    for (const auto& e : fs::directory_iterator(base / "plots")) {
      any_svg = any_svg || e.path().extension() == ".svg";
      if (e.path().extension() == ".svg") CHECK(slurp(e.path()).find("<svg") != std::string::npos);
    }
    CHECK(any_svg);
  }
}
