#ifndef EMPA_AGENTS_SCRIPTED_HPP_
#define EMPA_AGENTS_SCRIPTED_HPP_

// Deterministic backends driven by a JSON program. Program shapes per role
// are documented in docs/file_formats.md ("Scripted programs").

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "empa/agents/backend.hpp"
#include "empa/error.hpp"
#include "empa/json.hpp"
#include "empa/rubric.hpp"
#include "empa/scenario.hpp"

namespace empa::agents {

enum class Role { kUser, kTest, kJudge, kDirector };

constexpr std::string_view to_string(Role r) {
  switch (r) {
    case Role::kUser: return "user";
    case Role::kTest: return "test";
    case Role::kJudge: return "judge";
    case Role::kDirector: return "director";
  }
  return "?";
}

inline Role parse_role(std::string_view s) {
  if (s == "user") return Role::kUser;
  if (s == "test") return Role::kTest;
  if (s == "judge") return Role::kJudge;
  if (s == "director") return Role::kDirector;
  throw Error(ErrorCode::kConfigError, "unknown role '" + std::string(s) + "'");
}

struct ScriptedBackendSpec {
  Role role = Role::kUser;
  json program = json::object();
  std::uint64_t seed = 0;
};

inline void from_json(const json& j, ScriptedBackendSpec& s) {
  s.role = parse_role(j.at("role").get<std::string>());
  s.program = j.value("program", json::object());
  s.seed = j.value("seed", std::uint64_t{0});
}

inline void to_json(json& j, const ScriptedBackendSpec& s) {
  j = json{{"role", std::string(to_string(s.role))}, {"program", s.program}, {"seed", s.seed}};
}

namespace detail {

// Picks entry `i` of a canned list, cycling when `repeat` is set.
inline const json& canned(const json& list, std::size_t i, bool repeat, std::string_view what) {
  if (!list.is_array() || list.empty()) {
    throw Error(ErrorCode::kConfigError, std::string(what) + " program is empty");
  }
  if (i >= list.size()) {
    if (!repeat) {
      throw Error(ErrorCode::kProgramExhausted,
                  std::string(what) + " program ran out after " + std::to_string(list.size()) +
                      " entries");
    }
    i %= list.size();
  }
  return list[i];
}

inline std::string clip(std::string_view s, std::size_t n = 120) {
  return std::string(s.substr(0, n));
}

}  // namespace detail

class ScriptedUser : public UserBackend {
 public:
  explicit ScriptedUser(ScriptedBackendSpec spec) : spec_(std::move(spec)) {}

  std::string id() const override { return spec_.program.value("id", std::string("scripted-user")); }

  std::string respond(const UserContext& ctx) override {
    const auto& p = spec_.program;
    std::string text = detail::canned(p.at("utterances"), next_++, p.value("repeat", false), "user")
                           .get<std::string>();
    if (p.value("echo_memories", false)) {
      // Mentions each released memory once, on the first turn it is visible.
      for (std::size_t i = echoed_; i < ctx.released_memories.size(); ++i) {
        const auto& m = ctx.released_memories[i];
        text += " [" + m.key + "] " + m.text;
      }
      echoed_ = ctx.released_memories.size();
    }
    return text;
  }

 private:
  ScriptedBackendSpec spec_;
  std::size_t next_ = 0;
  std::size_t echoed_ = 0;
};

class ScriptedTest : public TestBackend {
 public:
  explicit ScriptedTest(ScriptedBackendSpec spec) : spec_(std::move(spec)) {}

  std::string id() const override { return spec_.program.value("id", std::string("scripted-test")); }

  std::string reply(const History&, std::string_view) override {
    const auto& p = spec_.program;
    return detail::canned(p.at("replies"), next_++, p.value("repeat", false), "test")
        .get<std::string>();
  }

 private:
  ScriptedBackendSpec spec_;
  std::size_t next_ = 0;
};

// Levels object {"C":[prog, neg], "A":[...], "P":[...]}, neg given as 0/-1/-2.
inline std::array<rubric::AxisLevels, 3> parse_levels(const json& j) {
  std::array<rubric::AxisLevels, 3> out{};
  for (AxisId axis : kAxes) {
    const std::string key(axis_letter(axis));
    if (!j.contains(key)) continue;
    const auto& pair = j.at(key);
    if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number_integer() ||
        !pair[1].is_number_integer()) {
      throw Error(ErrorCode::kConfigError, "levels for " + key + " must be [prog, neg] integers");
    }
    out[index_of(axis)] = {pair[0].get<int>(), pair[1].get<int>()};
  }
  return out;
}

// Indicator levels from persona priorities: High 3, Medium 2, Low 1.
inline rubric::IedrAssessment priority_assessment(const scenario::Scenario& s) {
  rubric::IedrAssessment a;
  const std::string quote = detail::clip(s.crisis_event.empty() ? s.id : s.crisis_event);
  for (rubric::Indicator id : rubric::kIndicators) {
    const auto it = s.persona.empathy_priority.find(rubric::axis_of(id));
    int level = 0;
    if (it != s.persona.empathy_priority.end()) level = static_cast<int>(it->second) + 1;
    a.indicators.push_back({id, level, level ? quote : "0", level ? "priority rule" : ""});
  }
  return a;
}

class ScriptedJudge : public JudgeBackend {
 public:
  explicit ScriptedJudge(ScriptedBackendSpec spec)
      : spec_(std::move(spec)), rng_(spec_.seed) {}

  std::string id() const override {
    return spec_.program.value("id", std::string("scripted-judge"));
  }

  rubric::IedrAssessment assess_initial(const scenario::Scenario& s) override {
    ++iedr_calls_;
    const json iedr = spec_.program.value("iedr", json("priority"));
    if (iedr.is_number_integer()) {
      auto a = rubric::uniform_assessment(iedr.get<int>());
      return a;
    }
    if (iedr.is_string() && iedr.get<std::string>() == "priority") {
      return priority_assessment(s);
    }
    if (iedr.is_object()) {
      rubric::IedrAssessment a;
      for (rubric::Indicator id : rubric::kIndicators) {
        const int level = iedr.value(std::string(rubric::to_string(id)), 0);
        a.indicators.push_back({id, level, level ? detail::clip(s.crisis_event) : "0",
                                level ? "scripted" : ""});
      }
      return a;
    }
    throw Error(ErrorCode::kConfigError, "unrecognised judge iedr program");
  }

  rubric::MdepWindowRating adjudicate(const JudgeContext& ctx) override {
    const auto& p = spec_.program;
    std::string quote = "fixture";
    if (!ctx.buffer.empty() && !ctx.buffer.back().model.empty()) {
      quote = detail::clip(ctx.buffer.back().model);
    }
    std::array<rubric::AxisLevels, 3> levels{};
    const std::string rule = p.value("rule", std::string(p.contains("windows") ? "list" : "constant"));
    if (rule == "list") {
      levels = parse_levels(detail::canned(p.at("windows"), next_++, p.value("repeat", false),
                                           "judge"));
    } else if (rule == "constant") {
      levels = parse_levels(p.value("levels", json::object()));
    } else if (rule == "random") {
      for (auto& l : levels) {
        l.prog = static_cast<int>(rng_() % 3);
        l.neg = -static_cast<int>(rng_() % 3);
      }
    } else if (rule == "by_reply") {
      // Rates the last model reply of the window by exact lookup.
      const std::string key = ctx.buffer.empty() ? std::string() : ctx.buffer.back().model;
      const auto& table = p.at("table");
      if (table.contains(key)) {
        levels = parse_levels(table.at(key));
      } else if (p.contains("default")) {
        levels = parse_levels(p.at("default"));
      } else {
        throw Error(ErrorCode::kProgramExhausted, "no rating for reply '" + detail::clip(key, 40) + "'");
      }
    } else {
      throw Error(ErrorCode::kConfigError, "unknown judge rule '" + rule + "'");
    }
    auto w = rubric::make_window(ctx.window_index, levels, quote);
    rubric::validate(w);
    return w;
  }

  int iedr_calls() const { return iedr_calls_; }

 private:
  ScriptedBackendSpec spec_;
  std::mt19937_64 rng_;
  std::size_t next_ = 0;
  int iedr_calls_ = 0;
};

class ScriptedDirector : public DirectorBackend {
 public:
  explicit ScriptedDirector(ScriptedBackendSpec spec) : spec_(std::move(spec)) {}

  std::string id() const override {
    return spec_.program.value("id", std::string("scripted-director"));
  }

  DirectorDecision decide(const History&, const EpmSummary&) override {
    const auto& p = spec_.program;
    if (!p.contains("actions")) return {};
    const auto& list = p.at("actions");
    const std::string then = p.value("then", std::string("exhaust"));
    const json* entry = nullptr;
    if (next_ < list.size()) {
      entry = &list[next_];
    } else if (then == "continue") {
      ++next_;
      return {};
    } else if (then == "repeat_last" && !list.empty()) {
      entry = &list.back();
    } else {
      entry = &detail::canned(list, next_, false, "director");
    }
    ++next_;
    DirectorDecision d;
    d.action = entry->get<DirectorAction>();
    d.guidance = entry->value("guidance_text", std::string());
    return d;
  }

 private:
  ScriptedBackendSpec spec_;
  std::size_t next_ = 0;
};

struct BackendSet {
  std::unique_ptr<UserBackend> user;
  std::unique_ptr<TestBackend> test;
  std::unique_ptr<JudgeBackend> judge;
  std::unique_ptr<DirectorBackend> director;
};

inline std::unique_ptr<UserBackend> scripted_user(const ScriptedBackendSpec& s) {
  return std::make_unique<ScriptedUser>(s);
}
inline std::unique_ptr<TestBackend> scripted_test(const ScriptedBackendSpec& s) {
  return std::make_unique<ScriptedTest>(s);
}
inline std::unique_ptr<JudgeBackend> scripted_judge(const ScriptedBackendSpec& s) {
  return std::make_unique<ScriptedJudge>(s);
}
inline std::unique_ptr<DirectorBackend> scripted_director(const ScriptedBackendSpec& s) {
  return std::make_unique<ScriptedDirector>(s);
}

}  // namespace empa::agents

#endif  // EMPA_AGENTS_SCRIPTED_HPP_
