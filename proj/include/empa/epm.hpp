#ifndef EMPA_EPM_HPP_
#define EMPA_EPM_HPP_

// Empathy Potential Model kernel: ideal direction, effective work, state
// update, and the energy-gated success check. Pure value code.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "empa/axis_vector.hpp"
#include "empa/error.hpp"

namespace empa {

// Guards every division by r0 or by a displacement: the denominator is
// floored at this value.
inline constexpr double kEpsilon = 1e-6;
inline constexpr double kOrthogonalTol = 1e-12;

inline double guarded(double denominator) {
  return std::max(denominator, kEpsilon);
}

enum class TerminationType { kSuccess, kEpmFailure, kDirectorStop, kMaxTurns };

constexpr std::string_view to_string(TerminationType t) {
  switch (t) {
    case TerminationType::kSuccess: return "SUCCESS";
    case TerminationType::kEpmFailure: return "EPM_FAILURE";
    case TerminationType::kDirectorStop: return "DIRECTOR_STOP";
    case TerminationType::kMaxTurns: return "MAX_TURNS";
  }
  return "?";
}

inline TerminationType parse_termination(std::string_view text) {
  if (text == "SUCCESS") return TerminationType::kSuccess;
  if (text == "EPM_FAILURE") return TerminationType::kEpmFailure;
  if (text == "DIRECTOR_STOP") return TerminationType::kDirectorStop;
  if (text == "MAX_TURNS") return TerminationType::kMaxTurns;
  throw Error(ErrorCode::kCorruptLog, "unknown termination '" + std::string(text) + "'");
}

inline double resistance(const PsychState& state) { return norm(state); }

// Unit vector from the state toward equilibrium, -P/|P|.
inline Direction ideal_direction(const PsychState& state) {
  const double r = resistance(state);
  if (r == 0.0) {
    throw Error(ErrorCode::kZeroResistance,
                "equilibrium state has no ideal direction");
  }
  return {-state.c / r, -state.a / r, -state.p / r};
}

struct EffectiveWork {
  double delta_e = 0.0;
  // Undefined (nullopt) for a null action.
  std::optional<double> cos_theta;
  double magnitude = 0.0;

  friend bool operator==(const EffectiveWork&, const EffectiveWork&) = default;
};

inline EffectiveWork effective_work(const ActionVector& v, const Direction& ideal) {
  EffectiveWork w;
  w.magnitude = norm(v);
  if (w.magnitude == 0.0) return w;
  w.delta_e = dot(v, ideal);
  // Orthogonal up to rounding: no work either way.
  if (std::abs(w.delta_e) <= kOrthogonalTol * w.magnitude) w.delta_e = 0.0;
  w.cos_theta = std::clamp(w.delta_e / w.magnitude, -1.0, 1.0);
  return w;
}

inline EffectiveWork effective_work(const ActionVector& v, const PsychState& state) {
  return effective_work(v, ideal_direction(state));
}

struct GateConfig {
  // Energy gate. When energy_relative_to_r0 is set the threshold is
  // eps_energy * r0.
  double eps_energy = 1.0;
  bool energy_relative_to_r0 = true;
  // Resolution radius as a fraction of r0.
  double eps_dist = 0.15;
  double tau_align = 0.5;
  // Failure once resistance >= (1 + fail_deterioration) * r0.
  double fail_deterioration = 0.25;

  double energy_threshold(double r0) const {
    return energy_relative_to_r0 ? eps_energy * r0 : eps_energy;
  }

  void validate() const {
    if (!(eps_energy >= 0.0)) throw Error(ErrorCode::kConfigError, "eps_energy must be >= 0");
    if (!(eps_dist > 0.0 && eps_dist < 1.0)) {
      throw Error(ErrorCode::kConfigError, "eps_dist must lie in (0, 1)");
    }
    if (!(tau_align > 0.0 && tau_align <= 1.0)) {
      throw Error(ErrorCode::kConfigError, "tau_align must lie in (0, 1]");
    }
    if (!(fail_deterioration > 0.0)) {
      throw Error(ErrorCode::kConfigError, "fail_deterioration must be > 0");
    }
  }

  friend bool operator==(const GateConfig&, const GateConfig&) = default;
};

// One adjudicated window as seen by the kernel.
struct WindowRecord {
  ActionVector action;
  EffectiveWork work;
  // Per-window regression intensity in [0, 3] (see rubric::penalty_intensity).
  double penalty = 0.0;
  PsychState state_before;
  PsychState state_after;

  friend bool operator==(const WindowRecord&, const WindowRecord&) = default;
};

class TrajectoryState {
 public:
  TrajectoryState() = default;

  // Throws ZeroResistance for an initial state at equilibrium.
  explicit TrajectoryState(const PsychState& initial)
      : current_(initial),
        initial_(initial),
        r0_(resistance(initial)),
        last_direction_(ideal_direction(initial)) {}

  const PsychState& current() const { return current_; }
  const PsychState& initial() const { return initial_; }
  double r0() const { return r0_; }
  double e_total() const { return e_total_; }
  double path_length() const { return path_length_; }
  const std::vector<WindowRecord>& windows() const { return windows_; }
  std::size_t window_count() const { return windows_.size(); }

  // Running mean of cos(theta) over windows with a nonzero action.
  std::optional<double> mean_cos() const {
    if (aligned_windows_ == 0) return std::nullopt;
    return cos_sum_ / static_cast<double>(aligned_windows_);
  }

  // The ideal direction the next window will be projected on. At
  // equilibrium this is the last well-defined direction.
  Direction next_direction() const {
    return resistance(current_) > 0.0 ? ideal_direction(current_) : last_direction_;
  }

  // Applies one window in place. Work is measured against the pre-update
  // state with the unclamped action; the state is then clamped at zero.
  const WindowRecord& apply(const ActionVector& v, double penalty = 0.0) {
    WindowRecord rec;
    rec.action = v;
    rec.penalty = penalty;
    rec.state_before = current_;
    const Direction dir = next_direction();
    last_direction_ = dir;
    rec.work = effective_work(v, dir);
    const PsychState moved = current_ + v;
    current_ = {std::min(moved.c, 0.0), std::min(moved.a, 0.0), std::min(moved.p, 0.0)};
    rec.state_after = current_;
    e_total_ += rec.work.delta_e;
    path_length_ += rec.work.magnitude;
    if (rec.work.cos_theta) {
      cos_sum_ += *rec.work.cos_theta;
      ++aligned_windows_;
    }
    windows_.push_back(rec);
    return windows_.back();
  }

 private:
  PsychState current_;
  PsychState initial_;
  double r0_ = 0.0;
  double e_total_ = 0.0;
  double path_length_ = 0.0;
  double cos_sum_ = 0.0;
  std::size_t aligned_windows_ = 0;
  Direction last_direction_;
  std::vector<WindowRecord> windows_;
};

inline TrajectoryState apply_window(const TrajectoryState& traj, const ActionVector& v,
                                    double penalty = 0.0) {
  TrajectoryState next = traj;
  next.apply(v, penalty);
  return next;
}

enum class GateOutcome { kSuccess, kFailure, kContinue };

constexpr std::string_view to_string(GateOutcome g) {
  switch (g) {
    case GateOutcome::kSuccess: return "SUCCESS";
    case GateOutcome::kFailure: return "FAILURE";
    case GateOutcome::kContinue: return "CONTINUE";
  }
  return "?";
}

// Predicates of the success condition, exposed for logging and tests.
struct GatePredicates {
  bool energy = false;
  bool resolution = false;
  bool companionship = false;
  bool deterioration = false;
};

inline GatePredicates gate_predicates(double e_total, double r0, double current_resistance,
                                      std::optional<double> mean_cos,
                                      const GateConfig& cfg) {
  GatePredicates g;
  g.energy = e_total > cfg.energy_threshold(r0);
  g.resolution = current_resistance < cfg.eps_dist * r0;
  g.companionship = mean_cos.has_value() && *mean_cos > cfg.tau_align;
  g.deterioration = current_resistance >= (1.0 + cfg.fail_deterioration) * r0;
  return g;
}

// Success requires the energy gate and either resolution or companionship;
// it takes precedence over failure.
inline GateOutcome decide_gate(const GatePredicates& g) {
  if (g.energy && (g.resolution || g.companionship)) return GateOutcome::kSuccess;
  if (g.deterioration) return GateOutcome::kFailure;
  return GateOutcome::kContinue;
}

inline GateOutcome check_gate(const TrajectoryState& traj, const GateConfig& cfg,
                              std::optional<double> mean_cos) {
  return decide_gate(gate_predicates(traj.e_total(), traj.r0(),
                                     resistance(traj.current()), mean_cos, cfg));
}

inline GateOutcome check_gate(const TrajectoryState& traj, const GateConfig& cfg) {
  return check_gate(traj, cfg, traj.mean_cos());
}

}  // namespace empa

#endif  // EMPA_EPM_HPP_
