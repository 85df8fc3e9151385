#ifndef EMPA_SCENARIO_HPP_
#define EMPA_SCENARIO_HPP_

// Persona cards, scenarios, quality validation, and difficulty banding.
// Scenario files are JSON documents, one scenario per file; see
// docs/file_formats.md.

#include <algorithm>
#include <array>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "empa/axis_vector.hpp"
#include "empa/error.hpp"
#include "empa/json.hpp"
#include "empa/rubric.hpp"

namespace empa::scenario {

enum class Level { kLow, kMedium, kHigh };

constexpr std::string_view to_string(Level l) {
  switch (l) {
    case Level::kLow: return "Low";
    case Level::kMedium: return "Medium";
    case Level::kHigh: return "High";
  }
  return "?";
}

inline Level parse_level(std::string_view s) {
  if (s == "Low") return Level::kLow;
  if (s == "Medium") return Level::kMedium;
  if (s == "High") return Level::kHigh;
  throw Error(ErrorCode::kSchemaIncomplete, "unknown level '" + std::string(s) + "'");
}

struct RoleInfo {
  std::string name;
  std::string gender;
  int age = 0;
  friend bool operator==(const RoleInfo&, const RoleInfo&) = default;
};

struct RoleTraits {
  std::string social_persona;
  std::string inner_core;
  friend bool operator==(const RoleTraits&, const RoleTraits&) = default;
};

struct EmpathyNeeds {
  std::string vent_content;
  std::string hoped_points;
  std::string threshold_constraints;
  friend bool operator==(const EmpathyNeeds&, const EmpathyNeeds&) = default;
};

struct PastExperiences {
  std::string childhood;
  std::string adolescence;
  std::string young_adulthood;
  std::string implicit_arc;
  friend bool operator==(const PastExperiences&, const PastExperiences&) = default;
};

struct CurrentSituation {
  std::string circumstances;
  std::string main_goal;
  std::string vision;
  friend bool operator==(const CurrentSituation&, const CurrentSituation&) = default;
};

struct Story {
  std::string trigger;
  // Evoked memory, reflection, self-examination, emotional eruption.
  std::array<std::string, 4> development;
  std::string outcome;
  std::string epilogue;
  friend bool operator==(const Story&, const Story&) = default;
};

struct PersonaCard {
  RoleInfo role_info;
  RoleTraits role_traits;
  std::optional<Level> empathy_threshold;
  std::string threshold_description;
  std::string chat_topic;
  EmpathyNeeds empathy_needs;
  std::map<AxisId, Level> empathy_priority;
  std::map<AxisId, std::string> priority_notes;
  PastExperiences past_experiences;
  CurrentSituation current_situation;
  Story story;
  friend bool operator==(const PersonaCard&, const PersonaCard&) = default;
};

// Named memory blocks the director may release to the user agent.
inline const std::vector<std::string>& memory_keys() {
  static const std::vector<std::string> keys = {
      "childhood", "adolescence", "young_adulthood", "implicit_arc", "trigger",
      "stage1",    "stage2",      "stage3",          "stage4",       "outcome",
      "epilogue"};
  return keys;
}

inline std::optional<std::string> memory_block(const PersonaCard& card, std::string_view key) {
  const auto& pe = card.past_experiences;
  const auto& st = card.story;
  if (key == "childhood") return pe.childhood;
  if (key == "adolescence") return pe.adolescence;
  if (key == "young_adulthood") return pe.young_adulthood;
  if (key == "implicit_arc") return pe.implicit_arc;
  if (key == "trigger") return st.trigger;
  if (key == "stage1") return st.development[0];
  if (key == "stage2") return st.development[1];
  if (key == "stage3") return st.development[2];
  if (key == "stage4") return st.development[3];
  if (key == "outcome") return st.outcome;
  if (key == "epilogue") return st.epilogue;
  return std::nullopt;
}

// Every (section path, text) pair of the card, in schema order.
inline std::vector<std::pair<std::string, const std::string*>> card_sections(
    const PersonaCard& c) {
  return {
      {"role_info.name", &c.role_info.name},
      {"role_info.gender", &c.role_info.gender},
      {"role_traits.social_persona", &c.role_traits.social_persona},
      {"role_traits.inner_core", &c.role_traits.inner_core},
      {"chat_topic", &c.chat_topic},
      {"empathy_needs.vent_content", &c.empathy_needs.vent_content},
      {"empathy_needs.hoped_points", &c.empathy_needs.hoped_points},
      {"empathy_needs.threshold_constraints", &c.empathy_needs.threshold_constraints},
      {"past_experiences.childhood", &c.past_experiences.childhood},
      {"past_experiences.adolescence", &c.past_experiences.adolescence},
      {"past_experiences.young_adulthood", &c.past_experiences.young_adulthood},
      {"past_experiences.implicit_arc", &c.past_experiences.implicit_arc},
      {"current_situation.circumstances", &c.current_situation.circumstances},
      {"current_situation.main_goal", &c.current_situation.main_goal},
      {"current_situation.vision", &c.current_situation.vision},
      {"story.trigger", &c.story.trigger},
      {"story.development.stage1", &c.story.development[0]},
      {"story.development.stage2", &c.story.development[1]},
      {"story.development.stage3", &c.story.development[2]},
      {"story.development.stage4", &c.story.development[3]},
      {"story.outcome", &c.story.outcome},
      {"story.epilogue", &c.story.epilogue},
  };
}

inline bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char ch) { return std::isspace(ch); });
}

// Sections that are absent or blank (age <= 0 and a missing threshold count).
inline std::vector<std::string> missing_sections(const PersonaCard& c) {
  std::vector<std::string> out;
  for (const auto& [path, text] : card_sections(c)) {
    if (is_blank(*text)) out.push_back(path);
  }
  if (c.role_info.age <= 0) out.push_back("role_info.age");
  if (!c.empathy_threshold) out.push_back("empathy_threshold");
  return out;
}

enum class MechanismMode { kRoutine, kChallenging };

struct MechanismLabel {
  AxisId axis = AxisId::kCognitive;
  MechanismMode mode = MechanismMode::kRoutine;
  friend bool operator==(const MechanismLabel&, const MechanismLabel&) = default;
  friend auto operator<=>(const MechanismLabel&, const MechanismLabel&) = default;
};

// "C-Routine", "P-Challenging", ...
inline std::string to_string(const MechanismLabel& m) {
  return std::string(axis_letter(m.axis)) +
         (m.mode == MechanismMode::kRoutine ? "-Routine" : "-Challenging");
}

inline MechanismLabel parse_mechanism(std::string_view s) {
  const auto dash = s.find('-');
  if (dash == std::string_view::npos) {
    throw Error(ErrorCode::kSchemaIncomplete, "bad mechanism label '" + std::string(s) + "'");
  }
  const auto axis = s.substr(0, dash);
  const auto mode = s.substr(dash + 1);
  if (axis != "C" && axis != "A" && axis != "P") {
    throw Error(ErrorCode::kSchemaIncomplete, "bad mechanism axis '" + std::string(s) + "'");
  }
  MechanismLabel m;
  m.axis = parse_axis(axis);
  if (mode == "Routine") {
    m.mode = MechanismMode::kRoutine;
  } else if (mode == "Challenging") {
    m.mode = MechanismMode::kChallenging;
  } else {
    throw Error(ErrorCode::kSchemaIncomplete, "bad mechanism mode '" + std::string(s) + "'");
  }
  return m;
}

enum class PersonaType { kReceptive, kDefensive };

constexpr std::string_view to_string(PersonaType t) {
  return t == PersonaType::kReceptive ? "Receptive" : "Defensive";
}

inline PersonaType parse_persona_type(std::string_view s) {
  if (s == "Receptive") return PersonaType::kReceptive;
  if (s == "Defensive") return PersonaType::kDefensive;
  throw Error(ErrorCode::kSchemaIncomplete, "unknown persona type '" + std::string(s) + "'");
}

enum class DifficultyBand { kEasy, kMedium, kHard, kExtreme };

constexpr std::string_view to_string(DifficultyBand b) {
  switch (b) {
    case DifficultyBand::kEasy: return "Easy";
    case DifficultyBand::kMedium: return "Medium";
    case DifficultyBand::kHard: return "Hard";
    case DifficultyBand::kExtreme: return "Extreme";
  }
  return "?";
}

inline DifficultyBand parse_band(std::string_view s) {
  if (s == "Easy") return DifficultyBand::kEasy;
  if (s == "Medium") return DifficultyBand::kMedium;
  if (s == "Hard") return DifficultyBand::kHard;
  if (s == "Extreme") return DifficultyBand::kExtreme;
  throw Error(ErrorCode::kSchemaIncomplete, "unknown band '" + std::string(s) + "'");
}

struct BandConfig {
  double mu = 32.32;
  double sigma = 4.52;
};

// Extreme: r0 > mu+sigma; Hard: (mu, mu+sigma]; Medium: [mu-sigma, mu];
// Easy: r0 < mu-sigma.
inline DifficultyBand difficulty_band(double r0, double mu, double sigma) {
  if (!(sigma > 0.0)) throw Error(ErrorCode::kConfigError, "sigma must be > 0");
  if (r0 > mu + sigma) return DifficultyBand::kExtreme;
  if (r0 > mu) return DifficultyBand::kHard;
  if (r0 >= mu - sigma) return DifficultyBand::kMedium;
  return DifficultyBand::kEasy;
}

inline DifficultyBand difficulty_band(double r0, const BandConfig& cfg = {}) {
  return difficulty_band(r0, cfg.mu, cfg.sigma);
}

struct ScenarioLabel {
  std::string name;
  bool primary = false;
  friend bool operator==(const ScenarioLabel&, const ScenarioLabel&) = default;
};

struct Scenario {
  std::string id;
  // "synthetic" for everything shipped with the repository.
  std::string provenance = "synthetic";
  PersonaCard persona;
  std::string crisis_event;
  std::vector<ScenarioLabel> labels;
  std::string domain_label;
  MechanismLabel mechanism;
  PersonaType persona_type = PersonaType::kReceptive;
  std::optional<rubric::IedrAssessment> iedr;
  std::optional<DifficultyBand> difficulty_band;
  friend bool operator==(const Scenario&, const Scenario&) = default;
};

inline std::optional<std::string> primary_label(const Scenario& s) {
  for (const auto& l : s.labels) {
    if (l.primary) return l.name;
  }
  return std::nullopt;
}

// Default six life domains. Four are named by the benchmark description;
// the last two are configuration.
inline std::vector<std::string> default_domains() {
  return {"Values & Beliefs",        "Physical & Mental Health", "Daily Life Circumstances",
          "Interpersonal Relations", "Work & Study",             "Family & Intimacy"};
}

using ContentPredicate = std::function<std::optional<std::string>(const Scenario&)>;

struct QualityCriteria {
  std::vector<std::string> domains = default_domains();
  std::size_t max_section_chars = 6000;
  std::size_t min_crisis_chars = 20;
  std::size_t max_crisis_chars = 4000;
  std::size_t max_secondary_labels = 8;
  // Case-insensitive substrings rejected anywhere in the card.
  std::vector<std::string> banned_terms;
  // Extra pluggable predicates; a returned string is a failure reason.
  std::vector<ContentPredicate> predicates;
  BandConfig band;
};

struct ValidationIssue {
  std::string code;
  std::string field;
  std::string message;
  friend bool operator==(const ValidationIssue&, const ValidationIssue&) = default;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  bool passed() const { return issues.empty(); }
  bool has(std::string_view code) const {
    return std::any_of(issues.begin(), issues.end(),
                       [&](const ValidationIssue& i) { return i.code == code; });
  }
};

inline void to_json(json& j, const ValidationReport& r) {
  json issues = json::array();
  for (const auto& i : r.issues) {
    issues.push_back({{"code", i.code}, {"field", i.field}, {"message", i.message}});
  }
  j = json{{"passed", r.passed()}, {"issues", issues}};
}

inline std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return out;
}

inline ValidationReport validate_scenario(const Scenario& s, const QualityCriteria& q) {
  ValidationReport r;
  auto issue = [&](std::string code, std::string field, std::string msg) {
    r.issues.push_back({std::move(code), std::move(field), std::move(msg)});
  };

  if (is_blank(s.id)) issue("MissingSection", "id", "scenario id is empty");
  for (const auto& path : missing_sections(s.persona)) {
    issue("MissingSection", "persona." + path, "section is empty");
  }
  for (AxisId axis : kAxes) {
    if (!s.persona.empathy_priority.count(axis)) {
      issue("MissingPriority", "persona.empathy_priority." + std::string(axis_name(axis)),
            "no priority for axis");
    }
  }
  for (const auto& [path, text] : card_sections(s.persona)) {
    if (text->size() > q.max_section_chars) {
      issue("LengthBound", "persona." + path, "section exceeds length bound");
    }
  }
  if (s.crisis_event.size() < q.min_crisis_chars || s.crisis_event.size() > q.max_crisis_chars) {
    issue("LengthBound", "crisis_event", "crisis event length outside bounds");
  }

  std::size_t primaries = 0;
  std::set<std::string> names;
  for (const auto& l : s.labels) {
    if (l.primary) ++primaries;
    if (is_blank(l.name)) issue("LabelConflict", "labels", "blank label");
    if (!names.insert(l.name).second) {
      issue("LabelConflict", "labels", "label '" + l.name + "' listed twice");
    }
  }
  if (primaries == 0) issue("LabelConflict", "labels", "no primary label");
  if (primaries > 1) issue("LabelConflict", "labels", "more than one primary label");
  if (s.labels.size() - std::min<std::size_t>(primaries, s.labels.size()) >
      q.max_secondary_labels) {
    issue("LabelConflict", "labels", "too many secondary labels");
  }
  if (std::find(q.domains.begin(), q.domains.end(), s.domain_label) == q.domains.end()) {
    issue("UnknownDomain", "domain_label", "domain '" + s.domain_label + "' not configured");
  }

  if (!q.banned_terms.empty()) {
    std::string all = lowercase(s.crisis_event);
    for (const auto& [path, text] : card_sections(s.persona)) all += "\n" + lowercase(*text);
    for (const auto& term : q.banned_terms) {
      if (!term.empty() && all.find(lowercase(term)) != std::string::npos) {
        issue("BannedContent", "persona", "contains banned term '" + term + "'");
      }
    }
  }
  for (const auto& pred : q.predicates) {
    if (auto reason = pred(s)) issue("BannedContent", "scenario", *reason);
  }

  if (s.iedr) {
    try {
      const auto init = rubric::assemble_initial_state(*s.iedr);
      if (init.degenerate) {
        issue("InvalidIedr", "iedr", "initial deficit is zero");
      } else if (s.difficulty_band &&
                 *s.difficulty_band != difficulty_band(init.r0, q.band)) {
        issue("BandMismatch", "difficulty_band",
              "band " + std::string(to_string(*s.difficulty_band)) + " inconsistent with r0");
      }
    } catch (const Error& e) {
      issue("InvalidIedr", "iedr", e.what());
    }
  } else if (s.difficulty_band) {
    issue("BandMismatch", "difficulty_band", "band given without an IEDR assessment");
  }
  return r;
}

// ---------------------------------------------------------------------------
// JSON

namespace detail {

inline std::string str(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) return {};
  if (!j.at(key).is_string()) {
    throw Error(ErrorCode::kSchemaIncomplete, std::string("field '") + key + "' must be text");
  }
  return j.at(key).get<std::string>();
}

inline const json& obj(const json& j, const char* key) {
  static const json empty = json::object();
  if (!j.is_object() || !j.contains(key)) return empty;
  return j.at(key);
}

}  // namespace detail

inline void to_json(json& j, const PersonaCard& c) {
  json priority = json::object();
  for (const auto& [axis, level] : c.empathy_priority) {
    priority[axis == AxisId::kProactive ? "motivational" : std::string(axis_name(axis))] =
        std::string(to_string(level));
  }
  json notes = json::object();
  for (const auto& [axis, text] : c.priority_notes) {
    notes[axis == AxisId::kProactive ? "motivational" : std::string(axis_name(axis))] = text;
  }
  j = json{
      {"role_info",
       {{"name", c.role_info.name}, {"gender", c.role_info.gender}, {"age", c.role_info.age}}},
      {"role_traits",
       {{"social_persona", c.role_traits.social_persona},
        {"inner_core", c.role_traits.inner_core}}},
      {"empathy_threshold",
       c.empathy_threshold ? json(std::string(to_string(*c.empathy_threshold))) : json(nullptr)},
      {"threshold_description", c.threshold_description},
      {"chat_topic", c.chat_topic},
      {"empathy_needs",
       {{"vent_content", c.empathy_needs.vent_content},
        {"hoped_points", c.empathy_needs.hoped_points},
        {"threshold_constraints", c.empathy_needs.threshold_constraints}}},
      {"empathy_priority", priority},
      {"priority_notes", notes},
      {"past_experiences",
       {{"childhood", c.past_experiences.childhood},
        {"adolescence", c.past_experiences.adolescence},
        {"young_adulthood", c.past_experiences.young_adulthood},
        {"implicit_arc", c.past_experiences.implicit_arc}}},
      {"current_situation",
       {{"circumstances", c.current_situation.circumstances},
        {"main_goal", c.current_situation.main_goal},
        {"vision", c.current_situation.vision}}},
      {"story",
       {{"trigger", c.story.trigger},
        {"development", c.story.development},
        {"outcome", c.story.outcome},
        {"epilogue", c.story.epilogue}}},
  };
}

inline void from_json(const json& j, PersonaCard& c) {
  using detail::obj;
  using detail::str;
  c = PersonaCard{};
  const json& ri = obj(j, "role_info");
  c.role_info.name = str(ri, "name");
  c.role_info.gender = str(ri, "gender");
  if (ri.contains("age") && ri.at("age").is_number_integer()) c.role_info.age = ri.at("age");
  const json& rt = obj(j, "role_traits");
  c.role_traits.social_persona = str(rt, "social_persona");
  c.role_traits.inner_core = str(rt, "inner_core");
  if (j.contains("empathy_threshold") && j.at("empathy_threshold").is_string()) {
    c.empathy_threshold = parse_level(j.at("empathy_threshold").get<std::string>());
  }
  c.threshold_description = str(j, "threshold_description");
  c.chat_topic = str(j, "chat_topic");
  const json& en = obj(j, "empathy_needs");
  c.empathy_needs.vent_content = str(en, "vent_content");
  c.empathy_needs.hoped_points = str(en, "hoped_points");
  c.empathy_needs.threshold_constraints = str(en, "threshold_constraints");
  for (const auto& [key, value] : obj(j, "empathy_priority").items()) {
    c.empathy_priority[parse_axis(key)] = parse_level(value.get<std::string>());
  }
  for (const auto& [key, value] : obj(j, "priority_notes").items()) {
    c.priority_notes[parse_axis(key)] = value.get<std::string>();
  }
  const json& pe = obj(j, "past_experiences");
  c.past_experiences.childhood = str(pe, "childhood");
  c.past_experiences.adolescence = str(pe, "adolescence");
  c.past_experiences.young_adulthood = str(pe, "young_adulthood");
  c.past_experiences.implicit_arc = str(pe, "implicit_arc");
  const json& cs = obj(j, "current_situation");
  c.current_situation.circumstances = str(cs, "circumstances");
  c.current_situation.main_goal = str(cs, "main_goal");
  c.current_situation.vision = str(cs, "vision");
  const json& st = obj(j, "story");
  c.story.trigger = str(st, "trigger");
  if (st.contains("development") && st.at("development").is_array()) {
    const auto& dev = st.at("development");
    for (std::size_t i = 0; i < 4 && i < dev.size(); ++i) {
      c.story.development[i] = dev[i].get<std::string>();
    }
  }
  c.story.outcome = str(st, "outcome");
  c.story.epilogue = str(st, "epilogue");
}

inline void to_json(json& j, const Scenario& s) {
  json labels = json::array();
  for (const auto& l : s.labels) labels.push_back({{"name", l.name}, {"primary", l.primary}});
  j = json{{"id", s.id},
           {"provenance", s.provenance},
           {"persona", s.persona},
           {"crisis_event", s.crisis_event},
           {"labels", labels},
           {"domain_label", s.domain_label},
           {"mechanism_label", to_string(s.mechanism)},
           {"persona_type", std::string(to_string(s.persona_type))}};
  if (s.iedr) j["iedr"] = *s.iedr;
  if (s.difficulty_band) j["difficulty_band"] = std::string(to_string(*s.difficulty_band));
}

inline void from_json(const json& j, Scenario& s) {
  if (!j.is_object()) throw Error(ErrorCode::kSchemaIncomplete, "scenario must be an object");
  s = Scenario{};
  s.id = detail::str(j, "id");
  if (j.contains("provenance")) s.provenance = detail::str(j, "provenance");
  s.persona = detail::obj(j, "persona").get<PersonaCard>();
  s.crisis_event = detail::str(j, "crisis_event");
  if (j.contains("labels")) {
    for (const auto& l : j.at("labels")) {
      s.labels.push_back({l.at("name").get<std::string>(), l.value("primary", false)});
    }
  }
  s.domain_label = detail::str(j, "domain_label");
  if (j.contains("mechanism_label")) {
    s.mechanism = parse_mechanism(j.at("mechanism_label").get<std::string>());
  }
  if (j.contains("persona_type")) {
    s.persona_type = parse_persona_type(j.at("persona_type").get<std::string>());
  }
  if (j.contains("iedr") && !j.at("iedr").is_null()) {
    s.iedr = j.at("iedr").get<rubric::IedrAssessment>();
  }
  if (j.contains("difficulty_band") && !j.at("difficulty_band").is_null()) {
    s.difficulty_band = parse_band(j.at("difficulty_band").get<std::string>());
  }
}

// ---------------------------------------------------------------------------
// Files

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kIoError, path.string() + ": " + e.what());
  }
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIoError, "cannot write " + tmp);
    out << text;
    if (!out) throw Error(ErrorCode::kIoError, "write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

inline Scenario load_scenario(const std::filesystem::path& path) {
  try {
    return read_json_file(path).get<Scenario>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kSchemaIncomplete, path.string() + ": " + e.what());
  }
}

inline void save_scenario(const Scenario& s, const std::filesystem::path& path) {
  write_text_file(path, json(s).dump(2) + "\n");
}

struct ManifestEntry {
  std::string id;
  std::string file;
  std::string primary_label;
  std::string domain;
  std::string mechanism;
  std::string persona_type;
  std::optional<std::string> band;
  std::optional<double> r0;
};

inline ManifestEntry manifest_entry(const Scenario& s, const std::string& file) {
  ManifestEntry e{s.id, file, primary_label(s).value_or(""), s.domain_label,
                  to_string(s.mechanism), std::string(to_string(s.persona_type)), {}, {}};
  if (s.difficulty_band) e.band = std::string(to_string(*s.difficulty_band));
  if (s.iedr) e.r0 = rubric::assemble_initial_state(*s.iedr).r0;
  return e;
}

inline json manifest_json(const std::string& name, const std::vector<ManifestEntry>& entries) {
  json list = json::array();
  for (const auto& e : entries) {
    json item{{"id", e.id},         {"file", e.file},
              {"primary_label", e.primary_label}, {"domain", e.domain},
              {"mechanism", e.mechanism},         {"persona_type", e.persona_type}};
    item["band"] = e.band ? json(*e.band) : json(nullptr);
    item["r0"] = e.r0 ? json(*e.r0) : json(nullptr);
    list.push_back(item);
  }
  return json{{"corpus", name}, {"schema", "empa.corpus/v1"}, {"scenarios", list}};
}

// Loads every scenario listed in <dir>/manifest.json, in manifest order.
// Without a manifest, every *.json file in the directory is loaded in
// lexicographic order.
inline std::vector<Scenario> load_corpus(const std::filesystem::path& dir) {
  std::vector<Scenario> out;
  const auto manifest = dir / "manifest.json";
  if (std::filesystem::exists(manifest)) {
    const json m = read_json_file(manifest);
    for (const auto& item : m.at("scenarios")) {
      out.push_back(load_scenario(dir / item.at("file").get<std::string>()));
    }
    return out;
  }
  if (!std::filesystem::is_directory(dir)) {
    throw Error(ErrorCode::kIoError, "corpus directory " + dir.string() + " not found");
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) out.push_back(load_scenario(f));
  return out;
}

}  // namespace empa::scenario

#endif  // EMPA_SCENARIO_HPP_
