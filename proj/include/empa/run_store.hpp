#ifndef EMPA_RUN_STORE_HPP_
#define EMPA_RUN_STORE_HPP_

// On-disk run store:
//   <root>/manifest.json
//   <root>/episodes/<model>/<scenario>.jsonl   one record per line
//   <root>/results/aggregate.json, leaderboard.csv, leaderboard.txt
// Episode files are written whole through a temporary file and a rename, so
// a crash never leaves a half-written episode behind.

#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "empa/error.hpp"
#include "empa/json.hpp"
#include "empa/orchestrator.hpp"
#include "empa/scenario.hpp"

namespace empa::store {

namespace fs = std::filesystem;

inline constexpr std::string_view kRunSchema = "empa.run/v1";

// File-system safe form of an id.
inline std::string safe_name(std::string_view id) {
  std::string out;
  for (char ch : id) {
    const bool ok = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') ||
                    (ch >= '0' && ch <= '9') || ch == '-' || ch == '_' || ch == '.';
    out += ok ? ch : '_';
  }
  return out.empty() ? "_" : out;
}

struct EpisodeRef {
  std::string model;
  std::string scenario;
  std::string file;  // relative to the store root
  friend bool operator==(const EpisodeRef&, const EpisodeRef&) = default;
};

inline EpisodeRef episode_ref(const std::string& model, const std::string& scenario) {
  return {model, scenario, "episodes/" + safe_name(model) + "/" + safe_name(scenario) + ".jsonl"};
}

struct Manifest {
  json config = json::object();
  std::uint64_t seed = 0;
  json backends = json::object();
  std::vector<std::string> models;
  std::vector<EpisodeRef> episodes;
  std::optional<std::string> created;
};

inline void to_json(json& j, const Manifest& m) {
  json eps = json::array();
  for (const auto& e : m.episodes) {
    eps.push_back({{"model", e.model}, {"scenario", e.scenario}, {"file", e.file}});
  }
  j = json{{"schema", kRunSchema}, {"config", m.config},   {"seed", m.seed},
           {"backends", m.backends}, {"models", m.models}, {"episodes", eps}};
  if (m.created) j["created"] = *m.created;
}

inline void from_json(const json& j, Manifest& m) {
  if (j.value("schema", std::string()) != kRunSchema) {
    throw Error(ErrorCode::kCorruptLog, "manifest schema is not " + std::string(kRunSchema));
  }
  m = Manifest{};
  m.config = j.value("config", json::object());
  m.seed = j.value("seed", std::uint64_t{0});
  m.backends = j.value("backends", json::object());
  m.models = j.value("models", std::vector<std::string>{});
  for (const auto& e : j.at("episodes")) {
    m.episodes.push_back({e.at("model").get<std::string>(), e.at("scenario").get<std::string>(),
                          e.at("file").get<std::string>()});
  }
  if (j.contains("created")) m.created = j.at("created").get<std::string>();
}

// Scenario labels carried into the log so reports need no corpus.
struct EpisodeLabels {
  std::string mechanism;
  std::string domain;
  std::string persona_type;
  std::string band;
};

inline EpisodeLabels labels_of(const scenario::Scenario& s) {
  EpisodeLabels l{scenario::to_string(s.mechanism), s.domain_label,
                  std::string(scenario::to_string(s.persona_type)), ""};
  if (s.difficulty_band) l.band = std::string(scenario::to_string(*s.difficulty_band));
  return l;
}

// Serialises an episode as line-delimited records.
inline std::string episode_jsonl(const EpisodeResult& r, const std::string& model,
                                 const EpisodeLabels& labels, const EpisodeConfig& cfg) {
  std::string out;
  auto line = [&](const json& j) { out += j.dump() + "\n"; };
  line({{"type", "episode_start"},
        {"scenario_id", r.scenario_id},
        {"model", model},
        {"mechanism", labels.mechanism},
        {"domain", labels.domain},
        {"persona_type", labels.persona_type},
        {"band", labels.band},
        {"config", cfg},
        {"iedr", r.iedr},
        {"iedr_from_judge", r.iedr_from_judge},
        {"p0", r.p0},
        {"r0", r.r0}});
  std::size_t next_window = 0;
  std::size_t next_decision = 0;
  for (std::size_t t = 0; t < r.history.size(); ++t) {
    const int turn = static_cast<int>(t) + 1;
    line({{"type", "turn"}, {"turn", turn}, {"user", r.history[t].user},
          {"model", r.history[t].model}});
    while (next_window < r.windows.size() && r.windows[next_window].last_turn == turn) {
      json w = r.windows[next_window++];
      w["type"] = "window";
      line(w);
    }
    while (next_decision < r.decisions.size() && r.decisions[next_decision].turn == turn) {
      json d = r.decisions[next_decision++];
      d["type"] = "director";
      line(d);
    }
  }
  line({{"type", "episode_end"},
        {"termination",
         r.termination ? json(std::string(to_string(*r.termination))) : json(nullptr)},
        {"complete", r.complete},
        {"abort_reason", r.abort_reason},
        {"retries", r.retries},
        {"metrics", r.metrics ? json(*r.metrics) : json(nullptr)},
        {"indices", r.indices ? json(*r.indices) : json(nullptr)}});
  return out;
}

// Parsed episode log.
struct EpisodeLog {
  EpisodeRef ref;
  EpisodeLabels labels;
  PsychState p0;
  double r0 = 0.0;
  std::vector<agents::Turn> turns;
  std::vector<WindowLog> windows;
  std::vector<DirectorLog> decisions;
  std::optional<TerminationType> termination;
  bool complete = false;
  bool ended = false;
  std::string abort_reason;
  std::optional<metrics::MetricBundle> metrics;
  std::optional<metrics::IndexBundle> indices;
};

class RunStore {
 public:
  explicit RunStore(fs::path root) : root_(std::move(root)) {}

  const fs::path& root() const { return root_; }

  bool exists() const { return fs::exists(root_ / "manifest.json"); }

  void write_manifest(const Manifest& m) const {
    scenario::write_text_file(root_ / "manifest.json", json(m).dump(2) + "\n");
  }

  Manifest read_manifest() const {
    if (!exists()) throw Error(ErrorCode::kEmptyStore, "no manifest in " + root_.string());
    try {
      return scenario::read_json_file(root_ / "manifest.json").get<Manifest>();
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kCorruptLog, std::string("manifest: ") + e.what());
    }
  }

  // Safe to call from several threads for different episodes.
  void write_episode(const EpisodeRef& ref, const std::string& jsonl) const {
    scenario::write_text_file(root_ / ref.file, jsonl);
  }

  bool has_episode(const EpisodeRef& ref) const { return fs::exists(root_ / ref.file); }

  EpisodeLog read_episode(const EpisodeRef& ref) const {
    std::ifstream in(root_ / ref.file);
    if (!in) throw Error(ErrorCode::kIncompleteStore, "missing episode log " + ref.file);
    EpisodeLog log;
    log.ref = ref;
    const std::string where = "episode " + ref.model + "/" + ref.scenario;
    int lineno = 0;
    bool started = false;
    for (std::string line; std::getline(in, line);) {
      ++lineno;
      if (line.empty()) continue;
      json j;
      try {
        j = json::parse(line);
      } catch (const json::exception& e) {
        throw Error(ErrorCode::kCorruptLog, where + " line " + std::to_string(lineno) + ": " +
                                                e.what());
      }
      const std::string type = j.value("type", std::string());
      try {
        if (type == "episode_start") {
          started = true;
          log.labels = {j.at("mechanism").get<std::string>(), j.at("domain").get<std::string>(),
                        j.at("persona_type").get<std::string>(), j.value("band", std::string())};
          log.p0 = j.at("p0").get<PsychState>();
          log.r0 = j.at("r0").get<double>();
        } else if (type == "turn") {
          log.turns.push_back({j.at("user").get<std::string>(), j.at("model").get<std::string>()});
        } else if (type == "window") {
          log.windows.push_back(j.get<WindowLog>());
        } else if (type == "director") {
          log.decisions.push_back(j.get<DirectorLog>());
        } else if (type == "episode_end") {
          log.ended = true;
          log.complete = j.at("complete").get<bool>();
          log.abort_reason = j.value("abort_reason", std::string());
          if (!j.at("termination").is_null()) {
            log.termination = parse_termination(j.at("termination").get<std::string>());
          }
          if (!j.at("metrics").is_null()) log.metrics = j.at("metrics").get<metrics::MetricBundle>();
          if (!j.at("indices").is_null()) log.indices = j.at("indices").get<metrics::IndexBundle>();
        } else {
          throw Error(ErrorCode::kCorruptLog, "unknown record type '" + type + "'");
        }
      } catch (const Error& e) {
        const std::string window =
            type == "window" ? " window " + std::to_string(j.value("window", 0)) : "";
        throw Error(ErrorCode::kCorruptLog,
                    where + window + " (line " + std::to_string(lineno) + "): " + e.what());
      } catch (const json::exception& e) {
        const std::string window =
            type == "window" ? " window " + std::to_string(j.value("window", 0)) : "";
        throw Error(ErrorCode::kCorruptLog,
                    where + window + " (line " + std::to_string(lineno) + "): " + e.what());
      }
    }
    if (!started) throw Error(ErrorCode::kCorruptLog, where + ": no episode_start record");
    return log;
  }

 private:
  fs::path root_;
};

}  // namespace empa::store

#endif  // EMPA_RUN_STORE_HPP_
