#include "ccm/ident_sa.hpp"

#include <cmath>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "ccm/errors.hpp"

namespace ccm {

SequenceKind parse_sequence(const std::string& name) {
  if (name == "harmonic") return SequenceKind::harmonic;
  if (name == "sign-reset" || name == "sign_reset") return SequenceKind::sign_reset;
  if (name == "sign-increment" || name == "sign_increment") return SequenceKind::sign_increment;
  throw ConfigError("unknown step sequence '" + name + "' (harmonic, sign-reset, sign-increment)");
}

std::string to_string(SequenceKind kind) {
  switch (kind) {
    case SequenceKind::harmonic: return "harmonic";
    case SequenceKind::sign_reset: return "sign-reset";
    case SequenceKind::sign_increment: return "sign-increment";
  }
  return "?";
}

std::string to_string(TuningStatus s) {
  switch (s) {
    case TuningStatus::accepted: return "accepted";
    case TuningStatus::cap: return "cap";
    case TuningStatus::diverged: return "diverged";
  }
  return "?";
}

void StepSequence::validate() const {
  if (!(a > 0.0) || !std::isfinite(a)) throw ConfigError("step sequence: a must be > 0");
  if (kind == SequenceKind::harmonic && !(b >= 0.0))
    throw ConfigError("step sequence: b must be >= 0 (negative b drives tuning the wrong way)");
}

SaState SaState::start(double alpha0, double eps, int m) {
  if (m < 1) throw ConfigError("stopping window m must be >= 1");
  SaState s;
  s.alpha = alpha0;
  s.eps = eps;
  s.m = m;
  s.history.push_back(alpha0);
  return s;
}

double step_size(const StepSequence& seq, SaState& state, double residual) {
  if (seq.kind == SequenceKind::harmonic) return seq.a / (seq.b + static_cast<double>(state.j));
  if (state.last_residual && state.j > 1 && !(*state.last_residual * residual > 0.0))
    state.n = seq.kind == SequenceKind::sign_reset ? state.j : state.n + 1;
  return seq.a / static_cast<double>(state.n);
}

void sa_step(SaState& state, double measured, double modelled, double k) {
  if (!std::isfinite(measured) || !std::isfinite(modelled)) {
    ++state.rejected;
    return;
  }
  const double r = measured - modelled;
  state.alpha -= k * r;
  state.last_residual = r;
  ++state.j;
  state.history.push_back(state.alpha);
  while (state.history.size() > static_cast<std::size_t>(state.m) + 1) state.history.pop_front();
}

std::optional<double> check_stop(const SaState& state) {
  if (state.history.size() < static_cast<std::size_t>(state.m) + 1) return std::nullopt;
  const double anchor = state.history.front();
  for (std::size_t i = 1; i < state.history.size(); ++i)
    if (!(std::abs(state.history[i] - anchor) < state.eps)) return std::nullopt;
  return anchor;
}

TuningResult run_tuning(TunableModel& model, const std::function<double(long)>& measurements,
                        const StepSequence& seq, double alpha0, const TuningLimits& limits) {
  seq.validate();
  if (!(alpha0 > 0.0)) throw ConfigError("initial alpha must be > 0");
  const double lo = limits.alpha_min > 0.0 ? limits.alpha_min : 0.1 * alpha0;
  const double hi = limits.alpha_max > 0.0 ? limits.alpha_max : 10.0 * alpha0;

  TuningResult result;
  result.last_iterate = alpha0;
  SaState state = SaState::start(alpha0, limits.eps_rel * alpha0, limits.m);
  for (long it = 1; it <= limits.max_iterations; ++it) {
    const double modelled = model.advance(state.alpha);
    const double measured = measurements(it);
    if (!std::isfinite(measured) || !std::isfinite(modelled)) {
      sa_step(state, measured, modelled, 0.0);
      continue;
    }
    const double residual = measured - modelled;
    const long j_before = state.j;
    const double k = step_size(seq, state, residual);
    result.trajectory.push_back({j_before, state.alpha, k, residual, state.n});
    sa_step(state, measured, modelled, k);
    state.eps = limits.eps_rel * std::abs(state.alpha);
    result.iterations = it;
    result.last_iterate = state.alpha;
    if (!(state.alpha >= lo && state.alpha <= hi)) {
      result.status = TuningStatus::diverged;
      result.final_alpha = state.alpha;
      result.rejected = state.rejected;
      return result;
    }
    if (!result.accept_iteration) {
      if (auto accepted = check_stop(state)) {
        result.accept_iteration = it;
        if (limits.stop_on_accept) {
          result.status = TuningStatus::accepted;
          result.final_alpha = *accepted;
          result.rejected = state.rejected;
          return result;
        }
      }
    }
  }
  result.status = TuningStatus::cap;
  result.final_alpha = state.alpha;
  result.rejected = state.rejected;
  return result;
}

void write_trajectory_csv(std::ostream& out, const TuningResult& result) {
  out << "j,alpha,k,residual,n\n";
  for (const auto& p : result.trajectory)
    fmt::print(out, "{},{:.10g},{:.10g},{:.10g},{}\n", p.j, p.alpha, p.k, p.residual, p.n);
}

void write_status_block(std::ostream& out, const TuningResult& result) {
  fmt::print(out, "status,{}\nfinal_alpha,{:.10g}\niterations,{}\nrejected,{}\n", to_string(result.status),
             result.final_alpha, result.iterations, result.rejected);
  if (result.accept_iteration) fmt::print(out, "stop_rule_iteration,{}\n", *result.accept_iteration);
}

}  // namespace ccm
