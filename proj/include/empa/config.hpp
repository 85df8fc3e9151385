#ifndef EMPA_CONFIG_HPP_
#define EMPA_CONFIG_HPP_

// Run configuration and the benchmark driver that ties corpus, sampling,
// backends, the run store and scoring together.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "empa/agents/chat_client.hpp"
#include "empa/agents/llm_backends.hpp"
#include "empa/agents/scripted.hpp"
#include "empa/error.hpp"
#include "empa/json.hpp"
#include "empa/orchestrator.hpp"
#include "empa/report.hpp"
#include "empa/run_store.hpp"
#include "empa/sampling.hpp"
#include "empa/scenario.hpp"

namespace empa {

namespace fs = std::filesystem;

// One backend slot: either a scripted program or a chat endpoint.
struct BackendSpec {
  std::string id;
  std::string kind = "scripted";  // "scripted" | "chat"
  json program = json::object();
  std::optional<agents::ChatEndpointConfig> endpoint;
};

inline void to_json(json& j, const BackendSpec& b) {
  j = json{{"kind", b.kind}};
  if (!b.id.empty()) j["id"] = b.id;
  if (b.kind == "scripted") j["program"] = b.program;
  if (b.endpoint) j["endpoint"] = *b.endpoint;
}

inline void from_json(const json& j, BackendSpec& b) {
  b = BackendSpec{};
  b.id = j.value("id", std::string());
  b.kind = j.value("kind", std::string("scripted"));
  if (b.kind == "scripted") {
    b.program = j.value("program", json::object());
  } else if (b.kind == "chat") {
    b.endpoint = j.at("endpoint").get<agents::ChatEndpointConfig>();
  } else {
    throw Error(ErrorCode::kConfigError, "backend kind must be scripted or chat, got '" + b.kind + "'");
  }
}

struct RunConfig {
  fs::path corpus = "data/corpus";
  std::optional<scenario::SamplingSpec> sample;
  EpisodeConfig episode;
  fs::path out = "runs/default";
  fs::path prompts = "assets/prompts";
  BackendSpec user;
  BackendSpec judge;
  BackendSpec director;
  std::vector<BackendSpec> models;
  // Omits wall-clock timestamps so identical runs give identical bytes.
  bool deterministic = true;
  // Skips episodes already present in the store.
  bool resume = false;

  void validate() const {
    episode.validate();
    if (models.empty()) throw Error(ErrorCode::kConfigError, "no models to evaluate");
    std::vector<std::string> seen;
    for (const auto& m : models) {
      if (m.id.empty()) throw Error(ErrorCode::kConfigError, "every model needs an id");
      if (std::find(seen.begin(), seen.end(), m.id) != seen.end()) {
        throw Error(ErrorCode::kConfigError, "duplicate model id '" + m.id + "'");
      }
      seen.push_back(m.id);
    }
  }
};

inline void to_json(json& j, const RunConfig& c) {
  j = json{{"corpus", c.corpus.generic_string()},
           {"episode", c.episode},
           {"out", c.out.generic_string()},
           {"prompts", c.prompts.generic_string()},
           {"backends", {{"user", c.user}, {"judge", c.judge}, {"director", c.director}}},
           {"models", c.models},
           {"deterministic", c.deterministic}};
  if (c.sample) j["sample"] = *c.sample;
}

// Relative paths are taken against `base` (the config file's directory).
inline RunConfig parse_run_config(const json& j, const fs::path& base) {
  auto resolve = [&](const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() ? path : (base / path).lexically_normal();
  };
  RunConfig c;
  try {
    if (j.contains("corpus")) c.corpus = resolve(j.at("corpus").get<std::string>());
    else c.corpus = resolve(c.corpus.string());
    if (j.contains("out")) c.out = resolve(j.at("out").get<std::string>());
    else c.out = resolve(c.out.string());
    if (j.contains("prompts")) c.prompts = resolve(j.at("prompts").get<std::string>());
    else c.prompts = resolve(c.prompts.string());
    if (j.contains("sample")) {
      const auto& s = j.at("sample");
      c.sample = s.is_string() ? scenario::read_json_file(resolve(s.get<std::string>()))
                                     .get<scenario::SamplingSpec>()
                               : s.get<scenario::SamplingSpec>();
    }
    if (j.contains("episode")) c.episode = j.at("episode").get<EpisodeConfig>();
    const json backends = j.value("backends", json::object());
    if (backends.contains("user")) c.user = backends.at("user").get<BackendSpec>();
    if (backends.contains("judge")) c.judge = backends.at("judge").get<BackendSpec>();
    if (backends.contains("director")) c.director = backends.at("director").get<BackendSpec>();
    c.models = j.value("models", std::vector<BackendSpec>{});
    c.deterministic = j.value("deterministic", true);
    c.resume = j.value("resume", false);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfigError, e.what());
  }
  return c;
}

inline RunConfig load_run_config(const fs::path& file) {
  json j;
  try {
    j = scenario::read_json_file(file);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kIoError) throw Error(ErrorCode::kConfigError, e.detail());
    throw;
  }
  return parse_run_config(j, file.parent_path());
}

// ---------------------------------------------------------------------------
// Backend construction

namespace config_detail {

inline std::uint64_t role_seed(std::uint64_t episode_seed, std::string_view role) {
  return episode_seed ^ fnv1a(role);
}

inline std::shared_ptr<agents::ChatClient> client_for(const agents::ChatEndpointConfig& cfg) {
  return std::make_shared<agents::ChatClient>(cfg);
}

inline agents::ChatFn chat_fn(const std::shared_ptr<agents::ChatClient>& c) {
  return [c](const std::vector<agents::ChatMessage>& m) { return c->complete(m); };
}

inline std::string backend_id(const BackendSpec& b, std::string fallback) {
  if (!b.id.empty()) return b.id;
  if (b.endpoint) return b.endpoint->model_name;
  return fallback;
}

}  // namespace config_detail

// Factory for one test model. Scripted programs are seeded per episode and
// per role; chat backends get a fresh client per episode.
inline BackendFactory make_factory(const RunConfig& cfg, const BackendSpec& model,
                                   std::shared_ptr<const agents::PromptSet> prompts) {
  return [&cfg, model, prompts](const scenario::Scenario&, std::uint64_t seed) {
    using namespace agents;
    OwnedBackends o;
    auto need_prompts = [&]() -> const PromptSet& {
      if (!prompts) throw Error(ErrorCode::kConfigError, "chat backends need a prompts directory");
      return *prompts;
    };
    auto scripted = [&](const BackendSpec& b, Role r) {
      return ScriptedBackendSpec{r, b.program, config_detail::role_seed(seed, to_string(r))};
    };
    if (cfg.user.kind == "chat") {
      o.user = std::make_unique<LlmUser>(config_detail::backend_id(cfg.user, "user"),
                                         config_detail::chat_fn(config_detail::client_for(*cfg.user.endpoint)),
                                         need_prompts().user);
    } else {
      o.user = scripted_user(scripted(cfg.user, Role::kUser));
    }
    if (model.kind == "chat") {
      o.test = std::make_unique<LlmTest>(model.id,
                                         config_detail::chat_fn(config_detail::client_for(*model.endpoint)),
                                         need_prompts().test);
    } else {
      o.test = scripted_test(scripted(model, Role::kTest));
    }
    if (cfg.judge.kind == "chat") {
      o.judge = std::make_unique<LlmJudge>(config_detail::backend_id(cfg.judge, "judge"),
                                           config_detail::chat_fn(config_detail::client_for(*cfg.judge.endpoint)),
                                           need_prompts().judge_iedr, need_prompts().judge_mdep);
    } else {
      o.judge = scripted_judge(scripted(cfg.judge, Role::kJudge));
    }
    if (cfg.director.kind == "chat") {
      o.director = std::make_unique<LlmDirector>(
          config_detail::backend_id(cfg.director, "director"),
          config_detail::chat_fn(config_detail::client_for(*cfg.director.endpoint)), need_prompts().director);
    } else {
      o.director = scripted_director(scripted(cfg.director, Role::kDirector));
    }
    return o;
  };
}

inline bool any_chat(const RunConfig& c) {
  if (c.user.kind == "chat" || c.judge.kind == "chat" || c.director.kind == "chat") return true;
  return std::any_of(c.models.begin(), c.models.end(),
                     [](const BackendSpec& m) { return m.kind == "chat"; });
}

inline std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// ---------------------------------------------------------------------------
// Benchmark driver

struct RunSummary {
  std::size_t episodes = 0;
  std::size_t skipped = 0;
  std::size_t aborted = 0;
  report::ScoreResult score;
};

using ProgressFn = std::function<void(const std::string& model, const EpisodeResult&)>;

// Writes the manifest first, then each episode as soon as it finishes, then
// re-scores the whole store from the logs.
inline RunSummary run_benchmark(const RunConfig& cfg, const ProgressFn& progress = {}) {
  cfg.validate();
  auto scenarios = scenario::load_corpus(cfg.corpus);
  if (cfg.sample) scenarios = scenario::stratified_sample(scenarios, *cfg.sample);
  if (scenarios.empty()) throw Error(ErrorCode::kConfigError, "corpus is empty");

  std::shared_ptr<const agents::PromptSet> prompts;
  if (any_chat(cfg)) prompts = std::make_shared<agents::PromptSet>(agents::load_prompts(cfg.prompts));

  store::RunStore st(cfg.out);
  store::Manifest m;
  m.config = cfg;
  m.config.erase("backends");
  m.config.erase("models");
  m.config.erase("out");
  m.seed = cfg.episode.seed;
  m.backends = {{"user", cfg.user}, {"judge", cfg.judge}, {"director", cfg.director}};
  for (const auto& model : cfg.models) {
    m.models.push_back(model.id);
    for (const auto& s : scenarios) m.episodes.push_back(store::episode_ref(model.id, s.id));
  }
  if (!cfg.deterministic) m.created = utc_timestamp();
  st.write_manifest(m);

  RunSummary summary;
  std::mutex mu;
  for (const auto& model : cfg.models) {
    std::vector<scenario::Scenario> todo;
    for (const auto& s : scenarios) {
      if (cfg.resume && st.has_episode(store::episode_ref(model.id, s.id))) {
        ++summary.skipped;
      } else {
        todo.push_back(s);
      }
    }
    run_batch(todo, make_factory(cfg, model, prompts), cfg.episode,
              [&](std::size_t i, const EpisodeResult& r) {
                st.write_episode(store::episode_ref(model.id, todo[i].id),
                                 store::episode_jsonl(r, model.id, store::labels_of(todo[i]),
                                                      cfg.episode));
                std::lock_guard<std::mutex> lock(mu);
                ++summary.episodes;
                if (!r.complete) ++summary.aborted;
                if (progress) progress(model.id, r);
              });
  }
  summary.score = report::score_store(st);
  return summary;
}

}  // namespace empa

#endif  // EMPA_CONFIG_HPP_
