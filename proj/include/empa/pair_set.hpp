#ifndef EMPA_PAIR_SET_HPP_
#define EMPA_PAIR_SET_HPP_

// Pair-set manifests for the perturbation harness: loading, scoring every
// pair under all scorers, and the statistics report.

#include <atomic>
#include <filesystem>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "empa/config.hpp"
#include "empa/perturb.hpp"

namespace empa::perturb {

inline constexpr std::string_view kPairSetSchema = "empa.pairs/v1";
inline constexpr std::string_view kPerturbReportSchema = "empa.perturb/v1";

struct PairSet {
  BackendSpec judge;
  std::uint64_t seed = 0;
  std::size_t n_resamples = kDefaultResamples;
  double tie_tol = kDefaultTieTol;
  int parallelism = 1;
  std::vector<PerturbationPair> pairs;
};

inline agents::History parse_context(const json& j) {
  agents::History h;
  for (const auto& t : j) {
    if (t.is_array()) {
      h.push_back({t.at(0).get<std::string>(), t.at(1).get<std::string>()});
    } else {
      h.push_back({t.at("user").get<std::string>(), t.at("model").get<std::string>()});
    }
  }
  return h;
}

// Scenario references are file paths relative to the manifest.
inline PairSet load_pair_set(const std::filesystem::path& file) {
  const json j = scenario::read_json_file(file);
  const auto base = file.parent_path();
  PairSet set;
  try {
    if (j.value("schema", std::string()) != kPairSetSchema) {
      throw Error(ErrorCode::kConfigError, "pair set schema is not " + std::string(kPairSetSchema));
    }
    set.judge = j.at("judge").get<BackendSpec>();
    set.seed = j.value("seed", std::uint64_t{0});
    set.n_resamples = j.value("n_resamples", kDefaultResamples);
    set.tie_tol = j.value("tie_tol", kDefaultTieTol);
    set.parallelism = j.value("parallelism", 1);
    std::map<std::string, scenario::Scenario> cache;
    for (const auto& p : j.at("pairs")) {
      const auto ref = p.at("scenario").get<std::string>();
      if (!cache.count(ref)) cache[ref] = scenario::load_scenario(base / ref);
      const auto& s = cache.at(ref);
      const auto context = parse_context(p.value("context", json::array()));
      const auto kind = p.at("kind").get<std::string>();
      if (kind == "PersonaFlip") {
        std::optional<AxisId> axis;
        if (p.contains("axis")) axis = parse_axis(p.at("axis").get<std::string>());
        set.pairs.push_back(make_flip_pair(p.at("pair_id"), p.value("case_id", s.id), s, context,
                                           p.at("user_message"), p.at("reply"), axis));
      } else if (kind == "Sycophancy") {
        std::optional<std::string> replacement;
        if (p.contains("replacement_reply")) replacement = p.at("replacement_reply").get<std::string>();
        set.pairs.push_back(make_sycophancy_pair(
            p.at("pair_id"), p.value("case_id", s.id), s, context, p.at("user_message"),
            p.at("reply"), parse_variant(p.at("variant").get<std::string>()), replacement));
      } else {
        throw Error(ErrorCode::kConfigError, "unknown pair kind '" + kind + "'");
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfigError, file.string() + ": " + e.what());
  }
  if (set.judge.kind == "chat" && !set.judge.endpoint) {
    throw Error(ErrorCode::kConfigError, "chat judge needs an endpoint");
  }
  return set;
}

using JudgeFactory = std::function<std::unique_ptr<agents::JudgeBackend>(std::uint64_t seed)>;

inline JudgeFactory judge_factory(const BackendSpec& spec,
                                  const std::filesystem::path& prompts_dir = "assets/prompts") {
  if (spec.kind == "chat") {
    auto prompts = std::make_shared<agents::PromptSet>(agents::load_prompts(prompts_dir));
    auto client = std::make_shared<agents::ChatClient>(*spec.endpoint);
    return [spec, prompts, client](std::uint64_t) -> std::unique_ptr<agents::JudgeBackend> {
      return std::make_unique<agents::LlmJudge>(
          spec.id.empty() ? spec.endpoint->model_name : spec.id,
          [client](const std::vector<agents::ChatMessage>& m) { return client->complete(m); },
          prompts->judge_iedr, prompts->judge_mdep);
    };
  }
  return [spec](std::uint64_t seed) {
    return agents::scripted_judge({agents::Role::kJudge, spec.program, seed});
  };
}

// Scores every pair with a fresh judge seeded from the pair id. Results
// keep input order.
inline std::vector<PerturbationPair> score_pairs(const PairSet& set, const JudgeFactory& make) {
  std::vector<PerturbationPair> out(set.pairs.size());
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::exception_ptr err;
  auto worker = [&] {
    for (std::size_t i = next++; i < set.pairs.size(); i = next++) {
      try {
        auto judge = make(episode_seed(set.seed, set.pairs[i].pair_id));
        out[i] = score_pair_all(set.pairs[i], *judge);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!err) err = std::current_exception();
      }
    }
  };
  const auto n = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(set.parallelism, 1)), 1,
                                         std::max<std::size_t>(set.pairs.size(), 1));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
  return out;
}

// Per-scorer statistics split by pair kind, at pair and case level.
inline json perturb_report(const PairSet& set, const std::vector<PerturbationPair>& scored) {
  json stats = json::object();
  for (PairKind kind : {PairKind::kPersonaFlip, PairKind::kSycophancy}) {
    const std::string kname = kind == PairKind::kPersonaFlip ? "PersonaFlip" : "Sycophancy";
    std::vector<std::string> keys;
    for (Scorer s : kScorers) keys.emplace_back(to_string(s));
    keys.emplace_back(kAlignmentKey);
    for (const auto& key : keys) {
      std::vector<double> d;
      std::vector<CaseDiff> cases;
      for (const auto& p : scored) {
        if (p.kind != kind) continue;
        const auto& [o, q] = p.scores.at(key);
        d.push_back(paired_diff(o, q));
        cases.push_back({p.case_id, d.back()});
      }
      if (d.empty()) continue;
      json entry = json::object();
      entry["n"] = d.size();
      try {
        entry["pair"] = paired_stats(d, set.n_resamples, set.seed, set.tie_tol);
      } catch (const Error& e) {
        entry["pair"] = {{"error", e.what()}};
      }
      try {
        entry["case"] = case_level_aggregate(cases, set.n_resamples, set.seed, set.tie_tol);
      } catch (const Error& e) {
        entry["case"] = {{"error", e.what()}};
      }
      stats[kname][key] = entry;
    }
  }
  json pairs = json::array();
  for (const auto& p : scored) {
    json j = p;
    for (const auto& [key, sides] : p.scores) j["d"][key] = paired_diff(sides.first, sides.second);
    pairs.push_back(j);
  }
  return json{{"schema", kPerturbReportSchema},
              {"config",
               {{"judge", set.judge},
                {"seed", set.seed},
                {"n_resamples", set.n_resamples},
                {"tie_tol", set.tie_tol}}},
              {"pairs", pairs},
              {"stats", stats}};
}

}  // namespace empa::perturb

#endif  // EMPA_PAIR_SET_HPP_
