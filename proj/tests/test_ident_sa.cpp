#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "ccm/errors.hpp"
#include "ccm/ident_sa.hpp"

using namespace ccm;

namespace {

/// Surface temperature falling linearly with the exchange coefficient.
struct LinearModel : TunableModel {
  double t0 = 1200.0, gain = 0.5;
  long calls = 0;
  double advance(double alpha_c) override {
    ++calls;
    return t0 - gain * alpha_c;
  }
};

SaState at(long j, long n, double last) {
  SaState s = SaState::start(100.0, 0.5, 10);
  s.j = j;
  s.n = n;
  s.last_residual = last;
  return s;
}

}  // namespace

TEST_SUITE("ident_sa") {
  TEST_CASE("sequence names") {
    CHECK(parse_sequence("harmonic") == SequenceKind::harmonic);
    CHECK(parse_sequence("sign-reset") == SequenceKind::sign_reset);
    CHECK(parse_sequence("sign-increment") == SequenceKind::sign_increment);
    CHECK_THROWS_AS(parse_sequence("fibonacci"), ConfigError);
    for (auto k : {SequenceKind::harmonic, SequenceKind::sign_reset, SequenceKind::sign_increment})
      CHECK(parse_sequence(to_string(k)) == k);
  }

  TEST_CASE("harmonic steps") {
    const StepSequence seq{SequenceKind::harmonic, 1.0, 0.0};
    SaState s = SaState::start(100.0, 0.5, 10);
    CHECK(step_size(seq, s, 1.0) == doctest::Approx(1.0));
    s.j = 2;
    CHECK(step_size(seq, s, 1.0) == doctest::Approx(0.5));
    s.j = 3;
    CHECK(step_size(seq, s, -1.0) == doctest::Approx(1.0 / 3.0));
    const StepSequence shifted{SequenceKind::harmonic, 2.0, 3.0};
    CHECK(step_size(shifted, s, 1.0) == doctest::Approx(2.0 / 6.0));
  }

  TEST_CASE("sign-reset and sign-increment branches") {
    const StepSequence reset{SequenceKind::sign_reset, 1.0, 0.0};
    SaState s = at(4, 1, 2.0);
    CHECK(step_size(reset, s, -3.0) == doctest::Approx(0.25));
    CHECK(s.n == 4);
    SaState keep = at(4, 1, 2.0);
    CHECK(step_size(reset, keep, 3.0) == doctest::Approx(1.0));
    CHECK(keep.n == 1);
    SaState zero = at(4, 1, 2.0);
    step_size(reset, zero, 0.0);
    CHECK(zero.n == 4);

    const StepSequence inc{SequenceKind::sign_increment, 1.0, 0.0};
    SaState t = at(4, 2, -1.0);
    CHECK(step_size(inc, t, 1.0) == doctest::Approx(1.0 / 3.0));
    CHECK(t.n == 3);
  }

  TEST_CASE("validation") {
    CHECK_NOTHROW(StepSequence{SequenceKind::harmonic, 1.0, 0.0}.validate());
    CHECK_THROWS_AS((StepSequence{SequenceKind::harmonic, 1.0, -1.0}.validate()), ConfigError);
    CHECK_THROWS_AS((StepSequence{SequenceKind::harmonic, 0.0, 0.0}.validate()), ConfigError);
    CHECK_THROWS_AS((StepSequence{SequenceKind::sign_reset, -1.0, 0.0}.validate()), ConfigError);
    CHECK_THROWS_AS(SaState::start(1.0, 0.1, 0), ConfigError);
  }

  TEST_CASE("robbins-monro conditions for the harmonic sequence") {
    const StepSequence seq{SequenceKind::harmonic, 1.0, 0.0};
    SaState s = SaState::start(1.0, 0.0, 10);
    double sum = 0.0, sq = 0.0, sq_1e5 = 0.0, k = 0.0;
    for (long j = 1; j <= 1000000; ++j) {
      s.j = j;
      k = step_size(seq, s, 1.0);
      sum += k;
      sq += k * k;
      if (j == 100000) sq_1e5 = sq;
    }
    CHECK(k < 1e-5);
    CHECK(sum > 10.0);
    CHECK(std::abs(sq - sq_1e5) < 1e-4);
  }

  TEST_CASE("sign-driven steps never grow") {
    std::mt19937_64 rng(5);
    std::bernoulli_distribution coin(0.5);
    for (auto kind : {SequenceKind::sign_reset, SequenceKind::sign_increment}) {
      const StepSequence seq{kind, 1.0, 0.0};
      SaState s = SaState::start(100.0, 0.0, 10);
      double prev = INFINITY;
      for (int j = 0; j < 1000; ++j) {
        const double r = coin(rng) ? 1.0 : -1.0;
        const double k = step_size(seq, s, r);
        CHECK(k <= prev);
        prev = k;
        sa_step(s, r, 0.0, 0.0);
      }
    }
  }

  TEST_CASE("sa_step arithmetic") {
    SaState s = SaState::start(100.0, 0.5, 3);
    sa_step(s, 1010.0, 1000.0, 0.5);
    CHECK(s.alpha == doctest::Approx(95.0));
    CHECK(s.j == 2);
    sa_step(s, 1000.0, 1000.0, 0.5);
    CHECK(s.alpha == doctest::Approx(95.0));
    sa_step(s, 2000.0, 1000.0, 0.0);
    CHECK(s.alpha == doctest::Approx(95.0));
    sa_step(s, 1003.0, 1000.0, 0.25);
    sa_step(s, 997.0, 1000.0, 0.25);
    CHECK(s.alpha == doctest::Approx(95.0));
    CHECK(s.history.size() == 4);
  }

  TEST_CASE("non-finite samples are rejected") {
    SaState s = SaState::start(100.0, 0.5, 3);
    sa_step(s, NAN, 1000.0, 0.5);
    sa_step(s, 1000.0, INFINITY, 0.5);
    CHECK(s.alpha == 100.0);
    CHECK(s.j == 1);
    CHECK(s.rejected == 2);
  }

  TEST_CASE("stopping rule") {
    SaState s = SaState::start(100.0, 0.2, 3);
    CHECK_FALSE(check_stop(s));
    s.history = {100.0, 100.1, 99.95, 100.05};
    REQUIRE(check_stop(s));
    CHECK(*check_stop(s) == 100.0);
    s.history = {100.0, 100.3, 100.0, 100.0};
    CHECK_FALSE(check_stop(s));
    s.history = {100.0, 100.1, 99.95};
    CHECK_FALSE(check_stop(s));
  }

  TEST_CASE("tuning at the truth stays put") {
    LinearModel model;
    const double truth = 400.0;
    const auto meas = [&](long) { return model.t0 - model.gain * truth; };
    const TuningResult r = run_tuning(model, meas, {SequenceKind::harmonic, 1.0, 0.0}, truth);
    CHECK(r.status == TuningStatus::accepted);
    CHECK(r.final_alpha == truth);
    for (const auto& p : r.trajectory) {
      CHECK(p.alpha == truth);
      CHECK(p.residual == 0.0);
    }
  }

  TEST_CASE("tuning converges on a linear model with noise") {
    LinearModel model;
    const double truth = 400.0;
    std::mt19937_64 rng(11);
    std::normal_distribution<double> noise(0.0, 3.0);
    const auto meas = [&](long) { return model.t0 - model.gain * truth + noise(rng); };
    TuningLimits lim;
    lim.stop_on_accept = false;
    lim.max_iterations = 500;
    const TuningResult r = run_tuning(model, meas, {SequenceKind::harmonic, 1.0, 0.0}, 1.3 * truth, lim);
    CHECK(r.status == TuningStatus::cap);
    CHECK(std::abs(r.last_iterate - truth) / truth < 0.02);
    CHECK(r.trajectory.size() == 500);
    CHECK(model.calls == 500);
  }

  TEST_CASE("larger alpha lowers the modelled temperature and the update sign follows") {
    LinearModel model;
    const auto meas = [&](long) { return model.t0 - model.gain * 300.0; };
    TuningLimits lim;
    lim.max_iterations = 1;
    const TuningResult r = run_tuning(model, meas, {SequenceKind::harmonic, 0.1, 0.0}, 400.0, lim);
    CHECK(r.trajectory[0].residual > 0.0);
    CHECK(r.last_iterate < 400.0);
  }

  TEST_CASE("divergence guard") {
    LinearModel model;
    model.gain = 50.0;
    const auto meas = [&](long) { return model.t0 - model.gain * 300.0; };
    const TuningResult r = run_tuning(model, meas, {SequenceKind::harmonic, 1.0, 0.0}, 400.0);
    CHECK(r.status == TuningStatus::diverged);
    CHECK(r.iterations < 10);
  }

  TEST_CASE("non-finite measurements are skipped by the loop") {
    LinearModel model;
    const auto meas = [&](long j) { return j % 2 ? NAN : model.t0 - model.gain * 400.0; };
    TuningLimits lim;
    lim.max_iterations = 20;
    lim.stop_on_accept = false;
    const TuningResult r = run_tuning(model, meas, {SequenceKind::harmonic, 1.0, 0.0}, 400.0, lim);
    CHECK(r.rejected == 10);
    CHECK(r.trajectory.size() == 10);
  }

  TEST_CASE("input checks") {
    LinearModel model;
    const auto meas = [](long) { return 1000.0; };
    CHECK_THROWS_AS(run_tuning(model, meas, {SequenceKind::harmonic, 1.0, -2.0}, 400.0), ConfigError);
    CHECK_THROWS_AS(run_tuning(model, meas, {SequenceKind::harmonic, 1.0, 0.0}, -1.0), ConfigError);
  }

  TEST_CASE("trajectory and status output") {
    LinearModel model;
    const auto meas = [&](long) { return model.t0 - model.gain * 400.0; };
    TuningLimits lim;
    lim.max_iterations = 3;
    lim.stop_on_accept = false;
    const TuningResult r = run_tuning(model, meas, {SequenceKind::sign_increment, 1.0, 0.0}, 440.0, lim);
    std::ostringstream traj, status;
    write_trajectory_csv(traj, r);
    write_status_block(status, r);
    CHECK(traj.str().rfind("j,alpha,k,residual,n\n1,440,1,20,1\n", 0) == 0);
    CHECK(status.str().rfind("status,cap\nfinal_alpha,", 0) == 0);
    CHECK(status.str().find("iterations,3\n") != std::string::npos);
  }
}
