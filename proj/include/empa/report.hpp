#ifndef EMPA_REPORT_HPP_
#define EMPA_REPORT_HPP_

// Re-scoring from episode logs, leaderboards, and plot-data exports.

#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "empa/error.hpp"
#include "empa/json.hpp"
#include "empa/metrics.hpp"
#include "empa/rubric.hpp"
#include "empa/run_store.hpp"

namespace empa::report {

using store::EpisodeLog;
using store::EpisodeRef;
using store::RunStore;

inline constexpr double kReplayTol = 1e-9;

struct EpisodeScore {
  EpisodeRef ref;
  store::EpisodeLabels labels;
  TerminationType termination = TerminationType::kMaxTurns;
  metrics::MetricBundle metrics;
  metrics::IndexBundle indices;
  // P0 followed by the state after every window.
  std::vector<PsychState> points;
};

namespace detail {

inline bool close(double a, double b) { return std::abs(a - b) <= kReplayTol; }

inline bool close(const PsychState& a, const PsychState& b) {
  return close(a.c, b.c) && close(a.a, b.a) && close(a.p, b.p);
}

inline bool close(const metrics::MetricBundle& x, const metrics::MetricBundle& y) {
  return x.status == y.status && close(x.rdi_raw, y.rdi_raw) && close(x.e_total, y.e_total) &&
         close(x.e_surplus, y.e_surplus) && close(x.s_net, y.s_net) && close(x.rho, y.rho) &&
         close(x.s_proj, y.s_proj) && close(x.tortuosity_raw, y.tortuosity_raw) &&
         close(x.mean_cos, y.mean_cos) && close(x.r_pos, y.r_pos) && close(x.r_pen, y.r_pen);
}

}  // namespace detail

// Replays the logged ratings through the engine, checks every logged number
// against the replay, and recomputes metrics and indices.
inline EpisodeScore rescore_episode(const EpisodeLog& log) {
  const std::string where = "episode " + log.ref.model + "/" + log.ref.scenario;
  if (!log.ended) throw Error(ErrorCode::kIncompleteStore, where + " has no episode_end record");
  if (!log.complete) {
    throw Error(ErrorCode::kIncompleteStore, where + " aborted: " + log.abort_reason);
  }
  if (!log.termination) throw Error(ErrorCode::kCorruptLog, where + " has no termination");
  if (log.windows.empty()) throw Error(ErrorCode::kCorruptLog, where + " has no windows");
  if (!detail::close(resistance(log.p0), log.r0)) {
    throw Error(ErrorCode::kCorruptLog, where + ": r0 does not match p0");
  }

  TrajectoryState traj(log.p0);
  EpisodeScore s;
  s.ref = log.ref;
  s.labels = log.labels;
  s.termination = *log.termination;
  s.points.push_back(log.p0);
  for (std::size_t i = 0; i < log.windows.size(); ++i) {
    const auto& w = log.windows[i];
    const std::string at = where + " window " + std::to_string(w.window);
    auto bad = [&](const std::string& what) { return Error(ErrorCode::kCorruptLog, at + ": " + what); };
    if (w.window != static_cast<int>(i) + 1) throw bad("out of sequence");
    ActionVector v;
    double pen = 0.0;
    try {
      rubric::validate(w.rating);
      v = rubric::assemble_action_vector(w.rating);
      pen = rubric::penalty_intensity(w.rating);
    } catch (const Error& e) {
      throw bad(e.what());
    }
    if (!(v == w.action)) throw bad("action does not match rating");
    if (pen != w.penalty) throw bad("penalty does not match rating");
    if (!detail::close(traj.current(), w.state_before)) throw bad("state_before does not match replay");
    const WindowRecord rec = traj.apply(v, pen);
    if (!detail::close(rec.work.delta_e, w.delta_e)) throw bad("delta_e does not match replay");
    if (!detail::close(rec.state_after, w.state_after)) throw bad("state_after does not match replay");
    s.points.push_back(rec.state_after);
  }
  s.metrics = metrics::raw_metrics(traj, s.termination);
  s.indices = metrics::compute_indices(s.metrics, traj.r0());
  if (log.metrics && !detail::close(*log.metrics, s.metrics)) {
    throw Error(ErrorCode::kCorruptLog, where + ": stored metrics disagree with replay");
  }
  return s;
}

// Loads and re-scores every episode named by the manifest. Missing or
// aborted episodes make the whole store incomplete.
inline std::vector<EpisodeScore> score_all(const RunStore& st, const store::Manifest& m) {
  std::vector<std::string> missing;
  for (const auto& ref : m.episodes) {
    if (!st.has_episode(ref)) missing.push_back(ref.model + "/" + ref.scenario);
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& x : missing) list += (list.empty() ? "" : ", ") + x;
    throw Error(ErrorCode::kIncompleteStore,
                std::to_string(missing.size()) + " episode(s) not logged: " + list);
  }
  std::vector<EpisodeScore> out;
  for (const auto& ref : m.episodes) out.push_back(rescore_episode(st.read_episode(ref)));
  return out;
}

struct LeaderboardRow {
  std::string model_id;
  metrics::IndexBundle indices;
  std::size_t episodes = 0;
  std::size_t success = 0;
  std::size_t failure = 0;
  std::size_t director_stop = 0;
  std::size_t timeout = 0;
};

inline std::vector<LeaderboardRow> build_leaderboard(const std::vector<EpisodeScore>& scores,
                                                     const std::vector<std::string>& models) {
  std::vector<LeaderboardRow> rows;
  for (const auto& model : models) {
    LeaderboardRow row;
    row.model_id = model;
    std::vector<metrics::IndexBundle> cases;
    for (const auto& s : scores) {
      if (s.ref.model != model) continue;
      cases.push_back(s.indices);
      ++row.episodes;
      switch (s.termination) {
        case TerminationType::kSuccess: ++row.success; break;
        case TerminationType::kEpmFailure: ++row.failure; break;
        case TerminationType::kDirectorStop: ++row.director_stop; break;
        case TerminationType::kMaxTurns: ++row.timeout; break;
      }
    }
    if (cases.empty()) continue;
    row.indices = metrics::aggregate_indices(cases);
    rows.push_back(row);
  }
  return rows;
}

inline std::string fixed(double x, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  std::string s = buf;
  if (s == "-0.000000" || s == "-0.0") s.erase(0, 1);
  return s;
}

inline std::vector<double> index_values(const metrics::IndexBundle& b) {
  return {b.idx_rdi,   b.idx_etot,  b.idx_snet,    b.idx_rho,       b.idx_sproj,
          b.idx_tau,   b.idx_rpos,  b.idx_align,   b.idx_pen,       b.outcome,
          b.efficiency, b.stability, b.epm_index};
}

inline const std::vector<std::string>& index_headers() {
  static const std::vector<std::string> h = {
      "RDI", "E_tot", "S_net", "rho", "S_proj", "tau", "R_pos", "Align", "Pen",
      "Outcome", "Efficiency", "Stability", "EPM_Q"};
  return h;
}

inline std::string leaderboard_csv(const std::vector<LeaderboardRow>& rows) {
  std::string out = "model";
  for (const auto& h : index_headers()) out += "," + h;
  out += ",episodes,success,failure,director_stop,timeout\n";
  for (const auto& r : rows) {
    out += r.model_id;
    for (double v : index_values(r.indices)) out += "," + fixed(v, 6);
    out += "," + std::to_string(r.episodes) + "," + std::to_string(r.success) + "," +
           std::to_string(r.failure) + "," + std::to_string(r.director_stop) + "," +
           std::to_string(r.timeout) + "\n";
  }
  return out;
}

inline std::string leaderboard_text(const std::vector<LeaderboardRow>& rows) {
  std::size_t width = 5;
  for (const auto& r : rows) width = std::max(width, r.model_id.size());
  auto pad = [](std::string s, std::size_t w) {
    if (s.size() < w) s.insert(0, w - s.size(), ' ');
    return s;
  };
  std::string out = std::string("Model") + std::string(width - 5, ' ');
  for (const auto& h : index_headers()) out += " " + pad(h, 10);
  out += "   S/F/D/T\n";
  for (const auto& r : rows) {
    out += r.model_id + std::string(width - r.model_id.size(), ' ');
    for (double v : index_values(r.indices)) out += " " + pad(fixed(v, 1), 10);
    out += "   " + std::to_string(r.success) + "/" + std::to_string(r.failure) + "/" +
           std::to_string(r.director_stop) + "/" + std::to_string(r.timeout) + "\n";
  }
  return out;
}

inline json aggregate_json(const std::vector<LeaderboardRow>& rows,
                           const std::vector<EpisodeScore>& scores) {
  json models = json::array();
  for (const auto& r : rows) {
    models.push_back({{"model", r.model_id},
                      {"indices", r.indices},
                      {"episodes", r.episodes},
                      {"success", r.success},
                      {"failure", r.failure},
                      {"director_stop", r.director_stop},
                      {"timeout", r.timeout}});
  }
  json episodes = json::array();
  for (const auto& s : scores) {
    episodes.push_back({{"model", s.ref.model},
                        {"scenario", s.ref.scenario},
                        {"mechanism", s.labels.mechanism},
                        {"termination", std::string(to_string(s.termination))},
                        {"metrics", s.metrics},
                        {"indices", s.indices}});
  }
  return json{{"schema", "empa.aggregate/v1"}, {"models", models}, {"episodes", episodes}};
}

struct ScoreResult {
  std::vector<EpisodeScore> scores;
  std::vector<LeaderboardRow> rows;
};

// Recomputes everything from the logs and rewrites results/. Idempotent.
inline ScoreResult score_store(const RunStore& st) {
  const auto m = st.read_manifest();
  ScoreResult r;
  r.scores = score_all(st, m);
  r.rows = build_leaderboard(r.scores, m.models);
  const auto dir = st.root() / "results";
  scenario::write_text_file(dir / "aggregate.json", aggregate_json(r.rows, r.scores).dump(2) + "\n");
  scenario::write_text_file(dir / "leaderboard.csv", leaderboard_csv(r.rows));
  scenario::write_text_file(dir / "leaderboard.txt", leaderboard_text(r.rows));
  return r;
}

// ---------------------------------------------------------------------------
// Plot data

enum class SeriesKind { kTrajectory3d, kRadar, kHeatmap };

inline SeriesKind parse_series(std::string_view s) {
  if (s == "trajectory3d") return SeriesKind::kTrajectory3d;
  if (s == "radar") return SeriesKind::kRadar;
  if (s == "heatmap") return SeriesKind::kHeatmap;
  throw Error(ErrorCode::kConfigError, "unknown series kind '" + std::string(s) + "'");
}

inline std::string trajectory_csv(const std::vector<EpisodeScore>& scores) {
  std::string out = "model,scenario,window,c,a,p\n";
  for (const auto& s : scores) {
    for (std::size_t i = 0; i < s.points.size(); ++i) {
      const auto& p = s.points[i];
      out += s.ref.model + "," + s.ref.scenario + "," + std::to_string(i) + "," + fixed(p.c, 6) +
             "," + fixed(p.a, 6) + "," + fixed(p.p, 6) + "\n";
    }
  }
  return out;
}

// Mean indices per (model, mechanism label).
inline std::string radar_csv(const std::vector<EpisodeScore>& scores,
                             const std::vector<std::string>& models) {
  std::string out = "model,mechanism";
  for (const auto& h : index_headers()) out += "," + h;
  out += ",episodes\n";
  for (const auto& model : models) {
    std::map<std::string, std::vector<metrics::IndexBundle>> groups;
    for (const auto& s : scores) {
      if (s.ref.model == model) groups[s.labels.mechanism].push_back(s.indices);
    }
    for (const auto& [mech, cases] : groups) {
      out += model + "," + mech;
      for (double v : index_values(metrics::aggregate_indices(cases))) out += "," + fixed(v, 6);
      out += "," + std::to_string(cases.size()) + "\n";
    }
  }
  return out;
}

// Model x case matrix of per-episode EPM-Q.
inline std::string heatmap_csv(const std::vector<EpisodeScore>& scores,
                               const std::vector<std::string>& models) {
  std::vector<std::string> cases;
  for (const auto& s : scores) {
    if (std::find(cases.begin(), cases.end(), s.ref.scenario) == cases.end()) {
      cases.push_back(s.ref.scenario);
    }
  }
  std::string out = "model";
  for (const auto& c : cases) out += "," + c;
  out += "\n";
  for (const auto& model : models) {
    out += model;
    for (const auto& c : cases) {
      std::string cell;
      for (const auto& s : scores) {
        if (s.ref.model == model && s.ref.scenario == c) cell = fixed(s.indices.epm_index, 6);
      }
      out += "," + cell;
    }
    out += "\n";
  }
  return out;
}

inline std::filesystem::path export_series(const RunStore& st, SeriesKind kind,
                                           const std::filesystem::path& out_dir) {
  const auto m = st.read_manifest();
  const auto scores = score_all(st, m);
  if (scores.empty()) throw Error(ErrorCode::kEmptyStore, "no completed episodes");
  std::filesystem::path file;
  std::string body;
  switch (kind) {
    case SeriesKind::kTrajectory3d:
      file = out_dir / "trajectory3d.csv";
      body = trajectory_csv(scores);
      break;
    case SeriesKind::kRadar:
      file = out_dir / "radar.csv";
      body = radar_csv(scores, m.models);
      break;
    case SeriesKind::kHeatmap:
      file = out_dir / "heatmap.csv";
      body = heatmap_csv(scores, m.models);
      break;
  }
  scenario::write_text_file(file, body);
  return file;
}

}  // namespace empa::report

#endif  // EMPA_REPORT_HPP_
