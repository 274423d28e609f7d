#pragma once

#include <deque>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace ccm {

enum class SequenceKind { harmonic, sign_reset, sign_increment };

SequenceKind parse_sequence(const std::string& name);
std::string to_string(SequenceKind kind);

/// Step sizes k_j: harmonic a / (b + j); the sign-driven variants a / n_j.
struct StepSequence {
  SequenceKind kind = SequenceKind::harmonic;
  double a = 1.0;
  double b = 0.0;

  void validate() const;
};

struct SaState {
  double alpha = 0.0;
  long j = 1;
  long n = 1;
  std::optional<double> last_residual;
  std::deque<double> history;  // last m + 1 iterates, oldest first
  double eps = 0.0;
  int m = 10;
  long rejected = 0;

  static SaState start(double alpha0, double eps, int m);
};

/// k_j for the residual about to be applied; advances n_j for the
/// sign-driven sequences (a zero product counts as a sign change).
double step_size(const StepSequence& seq, SaState& state, double residual);

/// alpha_{j+1} = alpha_j - k_j (T*_j - T_j). Non-finite samples leave the
/// iterate untouched and are counted in `rejected`.
void sa_step(SaState& state, double measured, double modelled, double k);

/// Accepted iterate alpha_n when the last m iterates all lie within eps of it.
std::optional<double> check_stop(const SaState& state);

/// Model under tuning: sets alpha_c, advances one sampling interval and
/// returns the modelled temperature at the measurement point.
class TunableModel {
 public:
  virtual ~TunableModel() = default;
  virtual double advance(double alpha_c) = 0;
};

struct TuningLimits {
  long max_iterations = 300;
  double alpha_min = 0.0;  // 0 = 0.1 x initial
  double alpha_max = 0.0;  // 0 = 10 x initial
  double eps_rel = 0.005;  // eps = eps_rel * current alpha
  int m = 10;
  bool stop_on_accept = true;
};

struct TrajectoryPoint {
  long j = 0;
  double alpha = 0.0;  // iterate used for this step
  double k = 0.0;
  double residual = 0.0;
  long n = 0;
};

enum class TuningStatus { accepted, cap, diverged };
std::string to_string(TuningStatus s);

struct TuningResult {
  std::vector<TrajectoryPoint> trajectory;
  TuningStatus status = TuningStatus::cap;
  double final_alpha = 0.0;
  double last_iterate = 0.0;  // iterate after the last update
  long iterations = 0;
  std::optional<long> accept_iteration;  // where the stop rule fired (or would have)
  long rejected = 0;
};

/// measurements(j) yields T*_j for iteration j >= 1.
TuningResult run_tuning(TunableModel& model, const std::function<double(long)>& measurements,
                        const StepSequence& seq, double alpha0, const TuningLimits& limits = {});

void write_trajectory_csv(std::ostream& out, const TuningResult& result);
void write_status_block(std::ostream& out, const TuningResult& result);

}  // namespace ccm
