#ifndef EMPA_AGENTS_BACKEND_HPP_
#define EMPA_AGENTS_BACKEND_HPP_

// Interfaces of the four dialogue roles. Each role sees only what its
// interface passes in: the test model gets dialogue text, the judge never
// gets director guidance, the director gets a structured state summary.

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "empa/axis_vector.hpp"
#include "empa/error.hpp"
#include "empa/json.hpp"
#include "empa/rubric.hpp"
#include "empa/scenario.hpp"

namespace empa::agents {

struct Turn {
  std::string user;
  std::string model;
  friend bool operator==(const Turn&, const Turn&) = default;
};

using History = std::vector<Turn>;

enum class Pacing { kSlower, kHold, kFaster };

constexpr std::string_view to_string(Pacing p) {
  switch (p) {
    case Pacing::kSlower: return "slower";
    case Pacing::kHold: return "hold";
    case Pacing::kFaster: return "faster";
  }
  return "?";
}

inline Pacing parse_pacing(std::string_view s) {
  if (s == "slower") return Pacing::kSlower;
  if (s == "hold") return Pacing::kHold;
  if (s == "faster") return Pacing::kFaster;
  throw Error(ErrorCode::kInvalidDirectorAction, "unknown pacing '" + std::string(s) + "'");
}

struct MemoryBlock {
  std::string key;
  std::string text;
  friend bool operator==(const MemoryBlock&, const MemoryBlock&) = default;
};

// Everything the simulated user may condition on for its next utterance.
// Guidance arrives here as side-channel context and is never part of the
// visible dialogue.
struct UserContext {
  const scenario::Scenario& scenario;
  const History& history;
  int turn = 1;
  std::string guidance;
  Pacing pacing = Pacing::kHold;
  std::vector<MemoryBlock> released_memories;
};

class UserBackend {
 public:
  virtual ~UserBackend() = default;
  virtual std::string id() const = 0;
  virtual std::string respond(const UserContext& ctx) = 0;
};

class TestBackend {
 public:
  virtual ~TestBackend() = default;
  virtual std::string id() const = 0;
  // `history` holds the completed exchanges; `user_message` is the pending one.
  virtual std::string reply(const History& history, std::string_view user_message) = 0;
};

struct JudgeContext {
  const scenario::Scenario& scenario;
  const History& history;
  std::span<const Turn> buffer;
  int window_index = 1;
};

class JudgeBackend {
 public:
  virtual ~JudgeBackend() = default;
  virtual std::string id() const = 0;
  virtual rubric::IedrAssessment assess_initial(const scenario::Scenario& s) = 0;
  virtual rubric::MdepWindowRating adjudicate(const JudgeContext& ctx) = 0;
};

struct DirectorAction {
  enum class Kind { kContinue, kReleaseMemory, kAdjustGuidance, kAdjustPacing, kTerminate };
  Kind kind = Kind::kContinue;
  // Memory key, guidance text, or termination reason depending on kind.
  std::string argument;
  Pacing pacing = Pacing::kHold;

  static DirectorAction cont() { return {}; }
  static DirectorAction release(std::string key) {
    return {Kind::kReleaseMemory, std::move(key), Pacing::kHold};
  }
  static DirectorAction guide(std::string text) {
    return {Kind::kAdjustGuidance, std::move(text), Pacing::kHold};
  }
  static DirectorAction pace(Pacing p) { return {Kind::kAdjustPacing, "", p}; }
  static DirectorAction terminate(std::string reason) {
    return {Kind::kTerminate, std::move(reason), Pacing::kHold};
  }
  friend bool operator==(const DirectorAction&, const DirectorAction&) = default;
};

constexpr std::string_view to_string(DirectorAction::Kind k) {
  using K = DirectorAction::Kind;
  switch (k) {
    case K::kContinue: return "Continue";
    case K::kReleaseMemory: return "ReleaseMemory";
    case K::kAdjustGuidance: return "AdjustGuidance";
    case K::kAdjustPacing: return "AdjustPacing";
    case K::kTerminate: return "Terminate";
  }
  return "?";
}

// Structured state the director decides on.
struct EpmSummary {
  int window = 0;
  int turn = 0;
  PsychState state;
  double resistance = 0.0;
  double r0 = 0.0;
  double e_total = 0.0;
  double last_delta_e = 0.0;
  std::optional<double> mean_cos;
  // (r0 - resistance) / r0, unclamped.
  double progress = 0.0;
  int stagnation_streak = 0;
  std::vector<std::string> released_memories;
  friend bool operator==(const EpmSummary&, const EpmSummary&) = default;
};

struct DirectorDecision {
  std::string guidance;
  DirectorAction action;
  friend bool operator==(const DirectorDecision&, const DirectorDecision&) = default;
};

class DirectorBackend {
 public:
  virtual ~DirectorBackend() = default;
  virtual std::string id() const = 0;
  virtual DirectorDecision decide(const History& history, const EpmSummary& summary) = 0;
};

// ---------------------------------------------------------------------------
// JSON

inline void to_json(json& j, const Turn& t) { j = json{{"user", t.user}, {"model", t.model}}; }

inline void from_json(const json& j, Turn& t) {
  t.user = j.at("user").get<std::string>();
  t.model = j.at("model").get<std::string>();
}

inline void to_json(json& j, const DirectorAction& a) {
  using K = DirectorAction::Kind;
  j = json{{"action", std::string(to_string(a.kind))}};
  switch (a.kind) {
    case K::kReleaseMemory: j["key"] = a.argument; break;
    case K::kAdjustGuidance: j["guidance"] = a.argument; break;
    case K::kAdjustPacing: j["pacing"] = std::string(to_string(a.pacing)); break;
    case K::kTerminate: j["reason"] = a.argument; break;
    case K::kContinue: break;
  }
}

inline void from_json(const json& j, DirectorAction& a) {
  using K = DirectorAction::Kind;
  if (!j.is_object() || !j.contains("action") || !j.at("action").is_string()) {
    throw Error(ErrorCode::kInvalidDirectorAction, "director action needs an 'action' name");
  }
  const auto name = j.at("action").get<std::string>();
  auto text = [&](const char* key) -> std::string {
    if (!j.contains(key) || !j.at(key).is_string()) {
      throw Error(ErrorCode::kInvalidDirectorAction, name + " needs '" + key + "'");
    }
    return j.at(key).get<std::string>();
  };
  a = DirectorAction{};
  if (name == "Continue") {
    a.kind = K::kContinue;
  } else if (name == "ReleaseMemory") {
    a.kind = K::kReleaseMemory;
    a.argument = text("key");
  } else if (name == "AdjustGuidance") {
    a.kind = K::kAdjustGuidance;
    a.argument = text("guidance");
  } else if (name == "AdjustPacing") {
    a.kind = K::kAdjustPacing;
    a.pacing = parse_pacing(text("pacing"));
  } else if (name == "Terminate") {
    a.kind = K::kTerminate;
    a.argument = j.contains("reason") && j.at("reason").is_string()
                     ? j.at("reason").get<std::string>()
                     : std::string();
  } else {
    throw Error(ErrorCode::kInvalidDirectorAction, "unknown director action '" + name + "'");
  }
}

inline void to_json(json& j, const EpmSummary& s) {
  j = json{{"window", s.window},
           {"turn", s.turn},
           {"state", s.state},
           {"resistance", s.resistance},
           {"r0", s.r0},
           {"e_total", s.e_total},
           {"last_delta_e", s.last_delta_e},
           {"mean_cos", s.mean_cos ? json(*s.mean_cos) : json(nullptr)},
           {"progress", s.progress},
           {"stagnation_streak", s.stagnation_streak},
           {"released_memories", s.released_memories}};
}

inline void from_json(const json& j, EpmSummary& s) {
  s.window = j.at("window").get<int>();
  s.turn = j.at("turn").get<int>();
  s.state = j.at("state").get<PsychState>();
  s.resistance = j.at("resistance").get<double>();
  s.r0 = j.at("r0").get<double>();
  s.e_total = j.at("e_total").get<double>();
  s.last_delta_e = j.at("last_delta_e").get<double>();
  s.mean_cos = j.at("mean_cos").is_null() ? std::nullopt
                                          : std::optional<double>(j.at("mean_cos").get<double>());
  s.progress = j.at("progress").get<double>();
  s.stagnation_streak = j.at("stagnation_streak").get<int>();
  s.released_memories = j.at("released_memories").get<std::vector<std::string>>();
}

}  // namespace empa::agents

#endif  // EMPA_AGENTS_BACKEND_HPP_
