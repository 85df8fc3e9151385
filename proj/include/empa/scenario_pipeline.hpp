#ifndef EMPA_SCENARIO_PIPELINE_HPP_
#define EMPA_SCENARIO_PIPELINE_HPP_

// Dialogue -> features -> persona card + crisis event -> validated scenario.
// Filter, extractor and generator are interfaces; keyword and template stubs
// ship for offline use, the chat-backed generator sits behind a flag.

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <utility>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "empa/agents/judge_wire.hpp"
#include "empa/error.hpp"
#include "empa/json.hpp"
#include "empa/scenario.hpp"

namespace empa::scenario {

struct Dialogue {
  std::string id;
  std::string text;
};

struct FeatureBundle {
  std::string source_id;
  std::map<AxisId, Level> need_priority;
  Level threshold = Level::kMedium;
  std::string topic;
  std::string domain;
  std::vector<std::string> vent_segments;
  std::vector<std::string> memory_cues;
  std::vector<std::string> threshold_cues;
};

inline void to_json(json& j, const FeatureBundle& f) {
  json pri = json::object();
  for (const auto& [axis, level] : f.need_priority) {
    pri[std::string(axis_name(axis))] = std::string(to_string(level));
  }
  j = json{{"source_id", f.source_id},
           {"need_priority", pri},
           {"threshold", std::string(to_string(f.threshold))},
           {"topic", f.topic},
           {"domain", f.domain},
           {"vent_segments", f.vent_segments},
           {"memory_cues", f.memory_cues},
           {"threshold_cues", f.threshold_cues}};
}

class SegmentFilter {
 public:
  virtual ~SegmentFilter() = default;
  // Keeps empathy-relevant segments; empty means the dialogue is skipped.
  virtual std::vector<std::string> filter(const Dialogue& d) = 0;
};

class FeatureExtractor {
 public:
  virtual ~FeatureExtractor() = default;
  virtual std::optional<FeatureBundle> extract(const Dialogue& d,
                                               const std::vector<std::string>& segments) = 0;
};

class ScenarioGenerator {
 public:
  virtual ~ScenarioGenerator() = default;
  virtual std::string id() const = 0;
  // Returns the persona card as JSON.
  virtual json persona(const FeatureBundle& f) = 0;
  virtual std::string crisis(const FeatureBundle& f, const PersonaCard& persona) = 0;
};

inline std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  for (std::string line; std::getline(in, line);) {
    if (!is_blank(line)) out.push_back(line);
  }
  return out;
}

inline std::size_t count_cues(const std::string& lower_text, const std::vector<std::string>& cues) {
  std::size_t n = 0;
  for (const auto& cue : cues) {
    for (auto pos = lower_text.find(cue); pos != std::string::npos;
         pos = lower_text.find(cue, pos + cue.size())) {
      ++n;
    }
  }
  return n;
}

struct KeywordLexicon {
  std::vector<std::string> cognitive = {"understand why", "make sense", "confused", "figure out",
                                        "don't get", "what should i", "advice", "why did"};
  std::vector<std::string> affective = {"i feel", "feel so", "exhausted", "lonely", "anxious",
                                        "vent", "cry", "hurts", "scared", "just listen",
                                        "someone to understand", "sad"};
  std::vector<std::string> proactive = {"goal", "dream", "give up", "why i started", "keep going",
                                        "motivation", "worth it", "purpose"};
  std::vector<std::string> defensive = {"don't tell me", "hate when", "cliche", "canned",
                                        "spare me", "slogan"};
  std::vector<std::string> memory = {"when i was", "i remember", "years ago", "as a kid",
                                     "back in"};
  // Lines carrying any of these markers make the whole dialogue ineligible.
  std::vector<std::string> sensitive = {"[sensitive]", "[redact]"};
  std::map<std::string, std::vector<std::string>> domains = {
      {"Values & Beliefs", {"believe", "faith", "values", "meaning"}},
      {"Physical & Mental Health", {"doctor", "sick", "diagnos", "sleep", "pain"}},
      {"Daily Life Circumstances", {"rent", "money", "commute", "move", "bills"}},
      {"Interpersonal Relations", {"friend", "roommate", "colleague", "neighbor"}},
      {"Work & Study", {"exam", "job", "boss", "study", "thesis", "work"}},
      {"Family & Intimacy", {"mother", "father", "parents", "partner", "marriage"}}};
};

class KeywordFilter : public SegmentFilter {
 public:
  explicit KeywordFilter(KeywordLexicon lex = {}) : lex_(std::move(lex)) {}

  std::vector<std::string> filter(const Dialogue& d) override {
    std::vector<std::string> keep;
    for (const auto& line : split_lines(d.text)) {
      const auto lower = lowercase(line);
      if (count_cues(lower, lex_.sensitive) > 0) return {};
      if (count_cues(lower, lex_.cognitive) + count_cues(lower, lex_.affective) +
              count_cues(lower, lex_.proactive) + count_cues(lower, lex_.memory) +
              count_cues(lower, lex_.defensive) >
          0) {
        keep.push_back(line);
      }
    }
    return keep;
  }

 private:
  KeywordLexicon lex_;
};

// The axis with the most cues is High, any other cued axis Medium, the rest
// Low. Ties resolve in the order affective, proactive, cognitive.
class KeywordFeatureExtractor : public FeatureExtractor {
 public:
  explicit KeywordFeatureExtractor(KeywordLexicon lex = {}) : lex_(std::move(lex)) {}

  std::optional<FeatureBundle> extract(const Dialogue& d,
                                       const std::vector<std::string>& segments) override {
    if (segments.empty()) return std::nullopt;
    FeatureBundle f;
    f.source_id = d.id;
    std::string all;
    for (const auto& s : segments) all += lowercase(s) + "\n";

    const std::map<AxisId, std::size_t> counts = {
        {AxisId::kCognitive, count_cues(all, lex_.cognitive)},
        {AxisId::kAffective, count_cues(all, lex_.affective)},
        {AxisId::kProactive, count_cues(all, lex_.proactive)}};
    const AxisId order[] = {AxisId::kAffective, AxisId::kProactive, AxisId::kCognitive};
    AxisId top = order[0];
    for (AxisId a : order) {
      if (counts.at(a) > counts.at(top)) top = a;
    }
    if (counts.at(top) == 0) return std::nullopt;
    for (AxisId a : kAxes) {
      f.need_priority[a] = a == top ? Level::kHigh
                                    : (counts.at(a) > 0 ? Level::kMedium : Level::kLow);
    }

    for (const auto& s : segments) {
      const auto lower = lowercase(s);
      if (count_cues(lower, lex_.memory) > 0) f.memory_cues.push_back(s);
      if (count_cues(lower, lex_.defensive) > 0) f.threshold_cues.push_back(s);
      if (count_cues(lower, lex_.affective) > 0) f.vent_segments.push_back(s);
    }
    f.threshold = f.threshold_cues.empty() ? Level::kMedium : Level::kHigh;

    std::size_t best = 0;
    f.domain = "Daily Life Circumstances";
    for (const auto& [domain, cues] : lex_.domains) {
      const auto n = count_cues(all, cues);
      if (n > best) {
        best = n;
        f.domain = domain;
      }
    }
    f.topic = segments.front().substr(0, 80);
    return f;
  }

 private:
  KeywordLexicon lex_;
};

// Offline stand-in: fills every card section from the features with fixed
// phrasing. Good enough to exercise validation and the benchmark loop.
class TemplateGenerator : public ScenarioGenerator {
 public:
  std::string id() const override { return "template"; }

  json persona(const FeatureBundle& f) override {
    PersonaCard c;
    c.role_info = {"Speaker " + f.source_id, "unspecified", 30};
    c.role_traits = {"Composed in company and reluctant to show strain.",
                     "Worries privately that the current struggle says something about them."};
    c.empathy_threshold = f.threshold;
    c.threshold_description = f.threshold == Level::kHigh
                                  ? "Pulls back at generic reassurance."
                                  : "Accepts sincere attempts even when clumsy.";
    c.chat_topic = f.topic;
    c.empathy_needs.vent_content =
        f.vent_segments.empty() ? f.topic : join(f.vent_segments, " ");
    c.empathy_needs.hoped_points = "Wants the listener to engage with what matters most to them.";
    c.empathy_needs.threshold_constraints =
        f.threshold_cues.empty() ? "Dislikes being rushed toward solutions."
                                 : join(f.threshold_cues, " ");
    c.empathy_priority = f.need_priority;
    c.past_experiences = {"Grew up in a busy household.", "Kept feelings to themself at school.",
                          "Built independence early in adult life.",
                          "Learned to handle setbacks alone."};
    if (!f.memory_cues.empty()) c.past_experiences.implicit_arc = join(f.memory_cues, " ");
    c.current_situation = {"Dealing with: " + f.topic, "Get through the present difficulty.",
                           "Feel steady again."};
    c.story.trigger = "A small incident brings the issue back into focus.";
    c.story.development = {"An older memory resurfaces.", "They weigh what it means now.",
                           "They question their own choices.", "The strain spills over."};
    c.story.outcome = "They decide to talk to someone.";
    c.story.epilogue = "An earlier moment of feeling unheard comes back to mind.";
    return c;
  }

  std::string crisis(const FeatureBundle& f, const PersonaCard&) override {
    return "Recently: " + f.topic + " It has left them unsettled and wanting to talk.";
  }

 private:
  static std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string out;
    for (const auto& p : parts) out += (out.empty() ? "" : sep) + p;
    return out;
  }
};

// Chat-backed generator. The prompt asks for a persona card JSON object.
class ChatGenerator : public ScenarioGenerator {
 public:
  ChatGenerator(agents::ChatFn chat, std::string persona_prompt)
      : chat_(std::move(chat)), prompt_(std::move(persona_prompt)) {}

  std::string id() const override { return "chat"; }

  json persona(const FeatureBundle& f) override {
    const std::string answer =
        chat_({{"system", prompt_}, {"user", "FEATURES\n" + json(f).dump(2)}});
    try {
      return agents::extract_json_block(answer);
    } catch (const Error& e) {
      throw Error(ErrorCode::kGeneratorFailure, e.detail());
    }
  }

  std::string crisis(const FeatureBundle& f, const PersonaCard& p) override {
    return chat_({{"system", "Write the recent triggering event for this persona in one paragraph."},
                  {"user", json(p).dump(2) + "\n" + json(f).dump(2)}});
  }

 private:
  agents::ChatFn chat_;
  std::string prompt_;
};

inline Scenario generate_scenario(const FeatureBundle& f, ScenarioGenerator& gen,
                                  const std::string& id) {
  Scenario s;
  s.id = id;
  s.provenance = "synthetic";
  try {
    s.persona = gen.persona(f).get<PersonaCard>();
    s.crisis_event = gen.crisis(f, s.persona);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kGeneratorFailure || e.code() == ErrorCode::kSchemaIncomplete) throw;
    throw Error(ErrorCode::kGeneratorFailure, e.what());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kGeneratorFailure, e.what());
  }
  auto missing = missing_sections(s.persona);
  for (AxisId axis : kAxes) {
    if (!s.persona.empathy_priority.count(axis)) {
      missing.push_back("empathy_priority." + std::string(axis_name(axis)));
    }
  }
  if (is_blank(s.crisis_event)) missing.push_back("crisis_event");
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw Error(ErrorCode::kSchemaIncomplete, "generator omitted: " + list);
  }

  AxisId top = AxisId::kAffective;
  for (const auto& [axis, level] : s.persona.empathy_priority) {
    if (level == Level::kHigh) {
      top = axis;
      break;
    }
  }
  s.labels = {{f.topic.empty() ? f.domain : f.topic, true}};
  s.domain_label = f.domain;
  s.persona_type = f.threshold == Level::kHigh ? PersonaType::kDefensive : PersonaType::kReceptive;
  s.mechanism = {top, s.persona_type == PersonaType::kDefensive ? MechanismMode::kChallenging
                                                                : MechanismMode::kRoutine};
  return s;
}

struct PipelineReport {
  std::vector<Scenario> accepted;
  std::vector<std::string> skipped;
  std::vector<std::pair<std::string, ValidationReport>> rejected;
};

inline PipelineReport run_pipeline(const std::vector<Dialogue>& dialogues, SegmentFilter& filter,
                                   FeatureExtractor& extractor, ScenarioGenerator& gen,
                                   const QualityCriteria& q) {
  PipelineReport r;
  for (const auto& d : dialogues) {
    const auto segments = filter.filter(d);
    const auto f = extractor.extract(d, segments);
    if (!f) {
      r.skipped.push_back(d.id);
      continue;
    }
    Scenario s = generate_scenario(*f, gen, "gen-" + d.id);
    auto verdict = validate_scenario(s, q);
    if (verdict.passed()) {
      r.accepted.push_back(std::move(s));
    } else {
      r.rejected.emplace_back(s.id, std::move(verdict));
    }
  }
  return r;
}

}  // namespace empa::scenario

#endif  // EMPA_SCENARIO_PIPELINE_HPP_
