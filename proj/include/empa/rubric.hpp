#ifndef EMPA_RUBRIC_HPP_
#define EMPA_RUBRIC_HPP_

// IEDR and MDEP-PR scoring keys, and the validation of judge evidence
// triples (level, evidence, reasoning). Scores depend on levels only.

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "empa/axis_vector.hpp"
#include "empa/epm.hpp"
#include "empa/error.hpp"

namespace empa::rubric {

// ---------------------------------------------------------------------------
// IEDR (initial deficit)

enum class WeightClass { kStandard, kPriority, kCore };

enum class Indicator { kC1, kC2, kC3, kA1, kA2, kA3, kP1, kP2, kP3 };

inline constexpr std::array<Indicator, 9> kIndicators = {
    Indicator::kC1, Indicator::kC2, Indicator::kC3, Indicator::kA1, Indicator::kA2,
    Indicator::kA3, Indicator::kP1, Indicator::kP2, Indicator::kP3};

constexpr std::string_view to_string(Indicator id) {
  constexpr std::array<std::string_view, 9> names = {"C.1", "C.2", "C.3", "A.1", "A.2",
                                                     "A.3", "P.1", "P.2", "P.3"};
  return names[static_cast<std::size_t>(id)];
}

inline Indicator parse_indicator(std::string_view code) {
  for (Indicator id : kIndicators) {
    if (to_string(id) == code) return id;
  }
  throw Error(ErrorCode::kUnknownIndicator, "unknown IEDR indicator '" + std::string(code) + "'");
}

constexpr AxisId axis_of(Indicator id) {
  return static_cast<AxisId>(static_cast<int>(id) / 3);
}

constexpr WeightClass weight_class(Indicator id) {
  switch (id) {
    case Indicator::kC3:
    case Indicator::kA3:
    case Indicator::kP3:
      return WeightClass::kPriority;
    case Indicator::kA2:
    case Indicator::kP2:
      return WeightClass::kCore;
    default:
      return WeightClass::kStandard;
  }
}

constexpr double multiplier(WeightClass w) {
  switch (w) {
    case WeightClass::kStandard: return 1.0;
    case WeightClass::kPriority: return 1.5;
    case WeightClass::kCore: return 2.0;
  }
  return 0.0;
}

// Base deficit unit: one ordinal level of a standard indicator.
inline constexpr int kBaseDeficitUnit = -2;

struct IedrIndicator {
  Indicator id = Indicator::kC1;
  int level = 0;
  std::string evidence;
  std::string reasoning;

  friend bool operator==(const IedrIndicator&, const IedrIndicator&) = default;
};

// Key cell for (weight class, level): 0/-2/-4/-6, 0/-3/-6/-9, 0/-4/-8/-12.
inline double iedr_score(Indicator id, int level) {
  if (level < 0 || level > 3) {
    throw Error(ErrorCode::kInvalidLevel, std::string(to_string(id)) + " level " +
                                              std::to_string(level) + " outside {0,1,2,3}");
  }
  return multiplier(weight_class(id)) * kBaseDeficitUnit * level;
}

inline double iedr_score(const IedrIndicator& ind) { return iedr_score(ind.id, ind.level); }

// An evidence field of "0" is the judge's explicit "no quote" marker.
inline bool has_evidence(const std::string& evidence) {
  return !evidence.empty() && evidence != "0";
}

struct IedrAssessment {
  std::vector<IedrIndicator> indicators;

  friend bool operator==(const IedrAssessment&, const IedrAssessment&) = default;
};

struct InitialState {
  PsychState p0;
  double r0 = 0.0;
  // r0 == 0: no deficit, nothing to evaluate.
  bool degenerate = false;
};

// Checks completeness (nine distinct codes), level ranges, and that every
// nonzero level carries evidence.
inline void validate(const IedrAssessment& a) {
  std::array<bool, 9> seen{};
  for (const auto& ind : a.indicators) {
    auto& flag = seen[static_cast<std::size_t>(ind.id)];
    if (flag) {
      throw Error(ErrorCode::kDuplicateIndicator,
                  "indicator " + std::string(to_string(ind.id)) + " rated twice");
    }
    flag = true;
    iedr_score(ind);
    if (ind.level > 0 && !has_evidence(ind.evidence)) {
      throw Error(ErrorCode::kMissingEvidence, "indicator " + std::string(to_string(ind.id)) +
                                                   " has level " + std::to_string(ind.level) +
                                                   " but no evidence");
    }
  }
  for (Indicator id : kIndicators) {
    if (!seen[static_cast<std::size_t>(id)]) {
      throw Error(ErrorCode::kMissingIndicator,
                  "indicator " + std::string(to_string(id)) + " missing");
    }
  }
}

inline InitialState assemble_initial_state(const IedrAssessment& a) {
  validate(a);
  InitialState out;
  for (const auto& ind : a.indicators) out.p0[axis_of(ind.id)] += iedr_score(ind);
  out.r0 = resistance(out.p0);
  out.degenerate = out.r0 == 0.0;
  return out;
}

// Uniform-level assessment with placeholder evidence; handy for fixtures.
inline IedrAssessment uniform_assessment(int level) {
  IedrAssessment a;
  for (Indicator id : kIndicators) {
    a.indicators.push_back({id, level, level > 0 ? "fixture" : "", "uniform fixture level"});
  }
  return a;
}

// ---------------------------------------------------------------------------
// MDEP-PR (per-window progress / regression)

enum class Channel { kProg, kNeg };

constexpr std::string_view to_string(Channel ch) {
  return ch == Channel::kProg ? "Prog" : "Neg";
}

inline Channel parse_channel(std::string_view text) {
  if (text == "Prog") return Channel::kProg;
  if (text == "Neg") return Channel::kNeg;
  throw Error(ErrorCode::kMalformedJudgeOutput, "unknown channel '" + std::string(text) + "'");
}

struct MdepChannelRating {
  AxisId axis = AxisId::kCognitive;
  Channel channel = Channel::kProg;
  // Prog in {0, 1, 2}; Neg in {0, -1, -2}.
  int level = 0;
  std::string evidence;
  std::string reasoning;

  friend bool operator==(const MdepChannelRating&, const MdepChannelRating&) = default;
};

// Prog: 0/+1/+3 on every axis. Neg: 0/-2/-4 on C, 0/-2/-5 on A and P.
inline double mdep_score(AxisId axis, Channel channel, int level) {
  if (channel == Channel::kProg) {
    switch (level) {
      case 0: return 0.0;
      case 1: return 1.0;
      case 2: return 3.0;
      default: break;
    }
  } else {
    switch (level) {
      case 0: return 0.0;
      case -1: return -2.0;
      case -2: return axis == AxisId::kCognitive ? -4.0 : -5.0;
      default: break;
    }
  }
  throw Error(ErrorCode::kInvalidLevel,
              std::string(axis_letter(axis)) + "." + std::string(to_string(channel)) +
                  " level " + std::to_string(level) + " outside the key");
}

inline double mdep_score(const MdepChannelRating& r) {
  return mdep_score(r.axis, r.channel, r.level);
}

struct MdepWindowRating {
  int window_index = 1;
  std::vector<MdepChannelRating> channels;

  friend bool operator==(const MdepWindowRating&, const MdepWindowRating&) = default;
};

inline std::size_t slot_of(AxisId axis, Channel ch) {
  return index_of(axis) * 2 + (ch == Channel::kNeg ? 1 : 0);
}

// Exactly one rating per (axis, channel), key-valid levels, and evidence plus
// reasoning on every nonzero level.
inline void validate(const MdepWindowRating& w) {
  if (w.window_index < 1) {
    throw Error(ErrorCode::kMalformedJudgeOutput, "window_index must be >= 1");
  }
  std::array<bool, 6> seen{};
  for (const auto& r : w.channels) {
    const std::string name = std::string(axis_letter(r.axis)) + "." +
                             std::string(to_string(r.channel));
    auto& flag = seen[slot_of(r.axis, r.channel)];
    if (flag) throw Error(ErrorCode::kMissingChannel, "channel " + name + " rated twice");
    flag = true;
    mdep_score(r);
    if (r.level != 0 && (!has_evidence(r.evidence) || r.reasoning.empty())) {
      throw Error(ErrorCode::kMissingEvidence,
                  "channel " + name + " has nonzero level but no evidence/reasoning");
    }
  }
  for (AxisId axis : kAxes) {
    for (Channel ch : {Channel::kProg, Channel::kNeg}) {
      if (!seen[slot_of(axis, ch)]) {
        throw Error(ErrorCode::kMissingChannel, "channel " + std::string(axis_letter(axis)) +
                                                    "." + std::string(to_string(ch)) +
                                                    " missing");
      }
    }
  }
}

inline ActionVector assemble_action_vector(const MdepWindowRating& w) {
  validate(w);
  ActionVector v;
  for (const auto& r : w.channels) v[r.axis] += mdep_score(r);
  return v;
}

// 0.5 * sum of |Neg level| over the axes: 0 (clean) .. 3 (severe on all).
inline double penalty_intensity(const MdepWindowRating& w) {
  int total = 0;
  for (const auto& r : w.channels) {
    if (r.channel == Channel::kNeg) total += r.level < 0 ? -r.level : r.level;
  }
  return 0.5 * total;
}

// Ordinal levels per axis, (prog, neg).
struct AxisLevels {
  int prog = 0;
  int neg = 0;
};

// Builds a window rating from ordinal levels with generated evidence; the
// quote is taken verbatim from `quote` for every nonzero channel.
inline MdepWindowRating make_window(int window_index, std::array<AxisLevels, 3> levels,
                                    const std::string& quote = "fixture") {
  MdepWindowRating w;
  w.window_index = window_index;
  for (AxisId axis : kAxes) {
    const auto& l = levels[index_of(axis)];
    const std::string ev = quote.empty() ? std::string("fixture") : quote;
    w.channels.push_back({axis, Channel::kProg, l.prog, l.prog != 0 ? ev : "",
                          l.prog != 0 ? "scripted progress" : ""});
    w.channels.push_back({axis, Channel::kNeg, l.neg, l.neg != 0 ? ev : "",
                          l.neg != 0 ? "scripted regression" : ""});
  }
  return w;
}

}  // namespace empa::rubric

#endif  // EMPA_RUBRIC_HPP_
