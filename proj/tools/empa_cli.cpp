// empa: command-line front end (run, score, report, perturb, validate,
// sample, gen). Errors go to stderr as one JSON object; see docs/cli.md.

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "empa/config.hpp"
#include "empa/exit_codes.hpp"
#include "empa/pair_set.hpp"
#include "empa/report.hpp"
#include "empa/sampling.hpp"
#include "empa/scenario_pipeline.hpp"

namespace fs = std::filesystem;
using empa::json;

namespace {

struct RunOpts {
  std::string config;
  std::string out;
  std::string corpus;
  std::optional<std::uint64_t> seed;
  std::optional<int> parallelism;
  std::optional<int> t_max;
  std::optional<int> k;
  bool no_sample = false;
  bool resume = false;
  bool quiet = false;
};

int cmd_run(const RunOpts& o) {
  auto cfg = empa::load_run_config(o.config);
  if (!o.out.empty()) cfg.out = o.out;
  if (!o.corpus.empty()) cfg.corpus = o.corpus;
  if (o.seed) cfg.episode.seed = *o.seed;
  if (o.parallelism) cfg.episode.parallelism = *o.parallelism;
  if (o.t_max) cfg.episode.t_max = *o.t_max;
  if (o.k) cfg.episode.k = *o.k;
  if (o.no_sample) cfg.sample.reset();
  if (o.resume) cfg.resume = true;

  std::mutex mu;
  auto progress = [&](const std::string& model, const empa::EpisodeResult& r) {
    if (o.quiet) return;
    std::lock_guard<std::mutex> lock(mu);
    std::cerr << model << " " << r.scenario_id << " "
              << (r.termination ? std::string(empa::to_string(*r.termination)) : "ABORTED") << " "
              << r.windows.size() << " windows\n";
  };
  const auto summary = empa::run_benchmark(cfg, progress);
  std::cout << empa::report::leaderboard_text(summary.score.rows);
  std::cout << json{{"store", cfg.out.generic_string()},
                    {"episodes", summary.episodes},
                    {"skipped", summary.skipped},
                    {"aborted", summary.aborted}}
                   .dump()
            << "\n";
  return empa::kExitOk;
}

int cmd_score(const std::string& store) {
  const auto r = empa::report::score_store(empa::store::RunStore(store));
  std::cout << empa::report::leaderboard_text(r.rows);
  return empa::kExitOk;
}

int cmd_report(const std::string& store, std::vector<std::string> series, std::string out) {
  empa::store::RunStore st(store);
  const auto r = empa::report::score_store(st);
  if (out.empty()) out = (st.root() / "series").string();
  if (std::find(series.begin(), series.end(), "all") != series.end()) {
    series = {"trajectory3d", "radar", "heatmap"};
  }
  json files = json::array();
  for (const auto& s : series) {
    files.push_back(
        empa::report::export_series(st, empa::report::parse_series(s), out).generic_string());
  }
  std::cout << empa::report::leaderboard_text(r.rows);
  std::cout << json{{"results", (st.root() / "results").generic_string()}, {"series", files}}.dump()
            << "\n";
  return empa::kExitOk;
}

int cmd_perturb(const std::string& pairs, const std::string& out, const std::string& prompts,
                std::optional<std::uint64_t> seed, std::optional<std::size_t> resamples) {
  auto set = empa::perturb::load_pair_set(pairs);
  if (seed) set.seed = *seed;
  if (resamples) set.n_resamples = *resamples;
  const auto scored =
      empa::perturb::score_pairs(set, empa::perturb::judge_factory(set.judge, prompts));
  const std::string text = empa::perturb::perturb_report(set, scored).dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
  } else {
    empa::scenario::write_text_file(out, text);
  }
  return empa::kExitOk;
}

std::vector<fs::path> scenario_files(const std::vector<std::string>& inputs) {
  std::vector<fs::path> files;
  for (const auto& in : inputs) {
    if (fs::is_directory(in)) {
      std::vector<fs::path> dir;
      for (const auto& e : fs::directory_iterator(in)) {
        if (e.path().extension() == ".json" && e.path().filename() != "manifest.json") {
          dir.push_back(e.path());
        }
      }
      std::sort(dir.begin(), dir.end());
      files.insert(files.end(), dir.begin(), dir.end());
    } else if (fs::exists(in)) {
      files.emplace_back(in);
    } else {
      throw empa::Error(empa::ErrorCode::kIoError, "no such file or directory: " + in);
    }
  }
  return files;
}

empa::scenario::QualityCriteria criteria(const std::vector<std::string>& banned) {
  empa::scenario::QualityCriteria q;
  q.banned_terms = banned;
  return q;
}

int cmd_validate(const std::vector<std::string>& inputs, const std::vector<std::string>& banned) {
  const auto q = criteria(banned);
  json out = json::array();
  bool ok = true;
  for (const auto& f : scenario_files(inputs)) {
    json entry{{"file", f.generic_string()}};
    try {
      const auto s = empa::scenario::load_scenario(f);
      const auto report = empa::scenario::validate_scenario(s, q);
      entry["id"] = s.id;
      entry.update(json(report));
      ok = ok && report.passed();
    } catch (const empa::Error& e) {
      entry["passed"] = false;
      entry["issues"] = json::array({{{"code", std::string(empa::to_string(e.code()))},
                                      {"field", ""},
                                      {"message", e.detail()}}});
      ok = false;
    }
    out.push_back(entry);
  }
  std::cout << out.dump(2) << "\n";
  return ok ? empa::kExitOk : empa::kExitValidation;
}

void write_scenarios(const fs::path& dir, const std::string& name,
                     const std::vector<empa::scenario::Scenario>& list) {
  std::vector<empa::scenario::ManifestEntry> entries;
  for (const auto& s : list) {
    const std::string file = empa::store::safe_name(s.id) + ".json";
    empa::scenario::save_scenario(s, dir / file);
    entries.push_back(empa::scenario::manifest_entry(s, file));
  }
  empa::scenario::write_text_file(dir / "manifest.json",
                                  empa::scenario::manifest_json(name, entries).dump(2) + "\n");
}

int cmd_sample(const std::string& corpus, const std::string& spec_file,
               std::optional<std::uint64_t> seed, const std::string& out) {
  auto spec = spec_file.empty() ? empa::scenario::benchmark_sampling_spec()
                                : empa::scenario::read_json_file(spec_file)
                                      .get<empa::scenario::SamplingSpec>();
  if (seed) spec.seed = *seed;
  const auto picked = empa::scenario::stratified_sample(empa::scenario::load_corpus(corpus), spec);
  if (!out.empty()) write_scenarios(out, "sample", picked);
  json ids = json::array();
  for (const auto& s : picked) ids.push_back(s.id);
  std::cout << json{{"seed", spec.seed}, {"count", picked.size()}, {"ids", ids}}.dump() << "\n";
  return empa::kExitOk;
}

int cmd_gen(const std::string& dialogues, const std::string& out,
            const std::vector<std::string>& banned) {
  using namespace empa::scenario;
  std::vector<Dialogue> list;
  std::vector<fs::path> files;
  if (fs::is_directory(dialogues)) {
    for (const auto& e : fs::directory_iterator(dialogues)) {
      if (e.path().extension() == ".txt") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
  } else {
    files.emplace_back(dialogues);
  }
  for (const auto& f : files) {
    list.push_back({f.stem().string(), empa::agents::read_text(f)});
  }
  KeywordFilter filter;
  KeywordFeatureExtractor extractor;
  TemplateGenerator gen;
  const auto report = run_pipeline(list, filter, extractor, gen, criteria(banned));
  if (!out.empty()) write_scenarios(out, "generated", report.accepted);
  json accepted = json::array();
  for (const auto& s : report.accepted) accepted.push_back(s.id);
  json rejected = json::array();
  for (const auto& [id, verdict] : report.rejected) {
    rejected.push_back({{"id", id}, {"report", verdict}});
  }
  std::cout << json{{"accepted", accepted}, {"skipped", report.skipped}, {"rejected", rejected}}
                   .dump(2)
            << "\n";
  return report.rejected.empty() ? empa::kExitOk : empa::kExitValidation;
}

int fail(const std::string& kind, const std::string& msg, int code) {
  std::cerr << json{{"error", kind}, {"message", msg}, {"exit_code", code}}.dump() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Empathy trajectory benchmark toolkit"};
  app.set_version_flag("--version", "empa 1.0.0");
  app.require_subcommand(1);

  RunOpts run;
  auto* run_cmd = app.add_subcommand("run", "Run the benchmark and score the store");
  run_cmd->add_option("-c,--config", run.config, "Run configuration file")->required();
  run_cmd->add_option("-o,--out", run.out, "Run store directory (overrides config)");
  run_cmd->add_option("--corpus", run.corpus, "Corpus directory (overrides config)");
  run_cmd->add_option("--seed", run.seed, "Run seed");
  run_cmd->add_option("--parallelism", run.parallelism, "Concurrent episodes")
      ->check(CLI::PositiveNumber);
  run_cmd->add_option("--t-max", run.t_max, "Turn budget")->check(CLI::PositiveNumber);
  run_cmd->add_option("--k", run.k, "Turns per window")->check(CLI::PositiveNumber);
  run_cmd->add_flag("--no-sample", run.no_sample, "Use the whole corpus");
  run_cmd->add_flag("--resume", run.resume, "Skip episodes already logged");
  run_cmd->add_flag("-q,--quiet", run.quiet, "No per-episode progress");

  std::string store;
  auto* score_cmd = app.add_subcommand("score", "Recompute results from episode logs");
  score_cmd->add_option("store", store, "Run store directory")->required();

  std::vector<std::string> series;
  std::string series_out;
  auto* report_cmd = app.add_subcommand("report", "Leaderboard and plot-data series");
  report_cmd->add_option("store", store, "Run store directory")->required();
  report_cmd->add_option("-s,--series", series, "trajectory3d, radar, heatmap or all")
      ->check(CLI::IsMember({"trajectory3d", "radar", "heatmap", "all"}));
  report_cmd->add_option("-o,--out", series_out, "Series directory (default <store>/series)");

  std::string pairs, perturb_out, prompts = "assets/prompts";
  std::optional<std::uint64_t> perturb_seed;
  std::optional<std::size_t> resamples;
  auto* perturb_cmd = app.add_subcommand("perturb", "Score perturbation pairs");
  perturb_cmd->add_option("pairs", pairs, "Pair-set manifest")->required();
  perturb_cmd->add_option("-o,--out", perturb_out, "Report file (default stdout)");
  perturb_cmd->add_option("--prompts", prompts, "Prompt directory for chat judges");
  perturb_cmd->add_option("--seed", perturb_seed, "Bootstrap seed");
  perturb_cmd->add_option("--resamples", resamples, "Bootstrap resamples")
      ->check(CLI::PositiveNumber);

  std::vector<std::string> inputs, banned;
  auto* validate_cmd = app.add_subcommand("validate", "Validate scenario files");
  validate_cmd->add_option("paths", inputs, "Scenario files or directories")->required();
  validate_cmd->add_option("--banned", banned, "Banned term (repeatable)");

  std::string corpus, spec_file, sample_out;
  std::optional<std::uint64_t> sample_seed;
  auto* sample_cmd = app.add_subcommand("sample", "Stratified sample of a corpus");
  sample_cmd->add_option("corpus", corpus, "Corpus directory")->required();
  sample_cmd->add_option("--spec", spec_file, "Sampling spec file (default 10/10/10, 5 per domain)");
  sample_cmd->add_option("--seed", sample_seed, "Sampling seed");
  sample_cmd->add_option("-o,--out", sample_out, "Write the sample as a corpus here");

  std::string dialogues, gen_out;
  auto* gen_cmd = app.add_subcommand("gen", "Dialogues to scenarios with the offline pipeline");
  gen_cmd->add_option("dialogues", dialogues, "Dialogue .txt file or directory")->required();
  gen_cmd->add_option("-o,--out", gen_out, "Write accepted scenarios here");
  gen_cmd->add_option("--banned", banned, "Banned term (repeatable)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("Usage", e.what(), empa::kExitUsage);
  }

  try {
    if (*run_cmd) return cmd_run(run);
    if (*score_cmd) return cmd_score(store);
    if (*report_cmd) return cmd_report(store, series, series_out);
    if (*perturb_cmd) return cmd_perturb(pairs, perturb_out, prompts, perturb_seed, resamples);
    if (*validate_cmd) return cmd_validate(inputs, banned);
    if (*sample_cmd) return cmd_sample(corpus, spec_file, sample_seed, sample_out);
    if (*gen_cmd) return cmd_gen(dialogues, gen_out, banned);
  } catch (const empa::Error& e) {
    std::cerr << empa::error_record(e).dump() << "\n";
    return empa::exit_code_for(e.code());
  } catch (const json::exception& e) {
    return fail("ConfigError", e.what(), empa::kExitConfig);
  } catch (const fs::filesystem_error& e) {
    return fail("IoError", e.what(), empa::kExitIo);
  } catch (const std::exception& e) {
    return fail("Error", e.what(), empa::kExitGeneric);
  }
  return empa::kExitGeneric;
}
