#ifndef EMPA_ORCHESTRATOR_HPP_
#define EMPA_ORCHESTRATOR_HPP_

// Episode loop: user speaks, test model replies, every k turns the judge
// rates the buffered window, the state updates, then the success check, the
// failure check and finally the director run in that order.
//
// EpisodeEngine is the single implementation; run_episode drives it with the
// test backend and Env exposes it as reset/step.

#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "empa/agents/backend.hpp"
#include "empa/epm.hpp"
#include "empa/error.hpp"
#include "empa/json.hpp"
#include "empa/metrics.hpp"
#include "empa/rubric.hpp"
#include "empa/scenario.hpp"

namespace empa {

struct EpisodeConfig {
  int t_max = 30;
  int k = 1;
  GateConfig gate;
  std::uint64_t seed = 0;
  int parallelism = 1;

  void validate() const {
    if (t_max < 1) throw Error(ErrorCode::kConfigError, "t_max must be >= 1");
    if (k < 1) throw Error(ErrorCode::kConfigError, "k must be >= 1");
    if (k > t_max) throw Error(ErrorCode::kConfigError, "k must not exceed t_max");
    if (parallelism < 1) throw Error(ErrorCode::kConfigError, "parallelism must be >= 1");
    gate.validate();
  }
};

inline void to_json(json& j, const EpisodeConfig& c) {
  j = json{{"t_max", c.t_max}, {"k", c.k}, {"gate", c.gate}, {"seed", c.seed},
           {"parallelism", c.parallelism}};
}

inline void from_json(const json& j, EpisodeConfig& c) {
  c = EpisodeConfig{};
  c.t_max = j.value("t_max", c.t_max);
  c.k = j.value("k", c.k);
  if (j.contains("gate")) c.gate = j.at("gate").get<GateConfig>();
  c.seed = j.value("seed", c.seed);
  c.parallelism = j.value("parallelism", c.parallelism);
  c.validate();
}

struct Backends {
  agents::UserBackend& user;
  agents::TestBackend& test;
  agents::JudgeBackend& judge;
  agents::DirectorBackend& director;
};

struct WindowLog {
  int window = 0;
  int first_turn = 0;
  int last_turn = 0;
  rubric::MdepWindowRating rating;
  ActionVector action;
  double penalty = 0.0;
  double delta_e = 0.0;
  std::optional<double> cos_theta;
  PsychState state_before;
  PsychState state_after;
  GateOutcome gate = GateOutcome::kContinue;
  friend bool operator==(const WindowLog&, const WindowLog&) = default;
};

struct DirectorLog {
  int window = 0;
  int turn = 0;
  agents::EpmSummary summary;
  agents::DirectorDecision decision;
  friend bool operator==(const DirectorLog&, const DirectorLog&) = default;
};

struct EpisodeResult {
  std::string scenario_id;
  std::string test_model;
  agents::History history;
  rubric::IedrAssessment iedr;
  bool iedr_from_judge = false;
  PsychState p0;
  double r0 = 0.0;
  std::vector<WindowLog> windows;
  std::vector<DirectorLog> decisions;
  std::optional<TerminationType> termination;
  std::optional<metrics::MetricBundle> metrics;
  std::optional<metrics::IndexBundle> indices;
  bool complete = true;
  std::string abort_reason;
  int retries = 0;
};

struct Reward {
  double delta_e = 0.0;
  bool window_closed = false;
  bool regression = false;
  int stagnation_streak = 0;
};

struct StepPacket {
  agents::EpmSummary state;
  Reward reward;
  bool done = false;
  std::optional<TerminationType> termination;
  json info = json::object();
};

class EpisodeEngine {
 public:
  EpisodeEngine(const scenario::Scenario& s, Backends b, EpisodeConfig cfg)
      : scenario_(s), b_(b), cfg_(std::move(cfg)) {
    cfg_.validate();
  }

  const EpisodeConfig& config() const { return cfg_; }
  bool done() const { return done_; }
  const std::string& pending_user_message() const { return pending_user_; }
  const agents::History& history() const { return result_.history; }

  StepPacket reset() {
    result_ = EpisodeResult{};
    result_.scenario_id = scenario_.id;
    result_.test_model = b_.test.id();
    traj_.reset();
    buffer_.clear();
    guidance_.clear();
    pacing_ = agents::Pacing::kHold;
    released_.clear();
    stagnation_ = 0;
    turn_ = 0;
    done_ = false;
    pending_user_.clear();

    if (scenario_.iedr) {
      result_.iedr = *scenario_.iedr;
    } else {
      std::optional<rubric::IedrAssessment> a;
      if (!guarded_call("judge", [&] { a = b_.judge.assess_initial(scenario_); })) {
        return packet({}, json{{"aborted", result_.abort_reason}});
      }
      result_.iedr = *a;
      result_.iedr_from_judge = true;
    }
    const auto init = rubric::assemble_initial_state(result_.iedr);
    if (init.degenerate) {
      throw Error(ErrorCode::kDegenerateScenario, "scenario " + scenario_.id + " has r0 = 0");
    }
    traj_.emplace(init.p0);
    result_.p0 = init.p0;
    result_.r0 = init.r0;
    if (!next_user_message()) return packet({}, json{{"aborted", result_.abort_reason}});
    return packet({}, json{{"user_message", pending_user_}});
  }

  // Consumes the test model's reply to the pending user message.
  StepPacket step(const std::string& model_message) {
    if (!traj_ && !done_) throw Error(ErrorCode::kConfigError, "step before reset");
    if (done_) throw Error(ErrorCode::kSteppedAfterDone, "episode already finished");
    ++turn_;
    result_.history.push_back({pending_user_, model_message});
    buffer_.push_back(result_.history.back());
    pending_user_.clear();

    Reward reward;
    json info = json::object();
    const bool window_turn = turn_ % cfg_.k == 0 || turn_ == cfg_.t_max;
    if (window_turn && !close_window(reward, info)) {
      info["aborted"] = result_.abort_reason;
      return packet(reward, std::move(info));
    }
    if (!done_ && turn_ >= cfg_.t_max) finish(TerminationType::kMaxTurns);
    if (!done_) {
      if (!next_user_message()) {
        info["aborted"] = result_.abort_reason;
        return packet(reward, std::move(info));
      }
      info["user_message"] = pending_user_;
    }
    return packet(reward, std::move(info));
  }

  // Asks the test backend for the pending reply, retrying once.
  std::optional<std::string> test_reply() {
    std::optional<std::string> reply;
    guarded_call("test", [&] { reply = b_.test.reply(result_.history, pending_user_); });
    return reply;
  }

  const EpisodeResult& result() const { return result_; }

 private:
  // Runs a backend call with one retry on transport-type failures. Returns
  // false after flagging the episode aborted.
  template <class Fn>
  bool guarded_call(const char* role, Fn&& fn) {
    for (int attempt = 0; attempt < 2; ++attempt) {
      try {
        fn();
        return true;
      } catch (const Error& e) {
        switch (e.code()) {
          case ErrorCode::kBackendFailure:
          case ErrorCode::kTimeout:
          case ErrorCode::kRateLimited:
          case ErrorCode::kMalformedResponse:
            if (attempt == 0) {
              ++result_.retries;
              continue;
            }
            return abort(role, e.what());
          case ErrorCode::kMalformedJudgeOutput:
          case ErrorCode::kInvalidDirectorAction:
          case ErrorCode::kAuthMissing:
          case ErrorCode::kInvalidLevel:
          case ErrorCode::kMissingChannel:
          case ErrorCode::kMissingEvidence:
            return abort(role, e.what());
          default:
            throw;
        }
      } catch (const json::exception& e) {
        return abort(role, e.what());
      }
    }
    return false;
  }

  bool abort(const char* role, const std::string& why) {
    result_.complete = false;
    result_.abort_reason = std::string(role) + ": " + why;
    done_ = true;
    return false;
  }

  void finish(TerminationType t) {
    result_.termination = t;
    done_ = true;
    if (!traj_->windows().empty()) {
      result_.metrics = metrics::raw_metrics(*traj_, t);
      result_.indices = metrics::compute_indices(*result_.metrics, traj_->r0());
    }
  }

  bool next_user_message() {
    std::vector<agents::MemoryBlock> memories;
    for (const auto& key : released_) {
      memories.push_back({key, *scenario::memory_block(scenario_.persona, key)});
    }
    agents::UserContext ctx{scenario_, result_.history, turn_ + 1, guidance_, pacing_,
                            std::move(memories)};
    return guarded_call("user", [&] { pending_user_ = b_.user.respond(ctx); });
  }

  agents::EpmSummary summary() const {
    agents::EpmSummary s;
    s.window = static_cast<int>(result_.windows.size());
    s.turn = turn_;
    if (!traj_) return s;
    s.state = traj_->current();
    s.resistance = resistance(s.state);
    s.r0 = traj_->r0();
    s.e_total = traj_->e_total();
    s.last_delta_e = traj_->windows().empty() ? 0.0 : traj_->windows().back().work.delta_e;
    s.mean_cos = traj_->mean_cos();
    s.progress = (s.r0 - s.resistance) / guarded(s.r0);
    s.stagnation_streak = stagnation_;
    s.released_memories = released_;
    return s;
  }

  bool close_window(Reward& reward, json& info) {
    const int index = static_cast<int>(result_.windows.size()) + 1;
    const agents::History earlier(result_.history.begin(),
                                  result_.history.end() - static_cast<long>(buffer_.size()));
    std::optional<rubric::MdepWindowRating> rating;
    const bool ok = guarded_call("judge", [&] {
      agents::JudgeContext ctx{scenario_, earlier, buffer_, index};
      auto r = b_.judge.adjudicate(ctx);
      if (r.window_index != index) {
        throw Error(ErrorCode::kMalformedJudgeOutput,
                    "rating for window " + std::to_string(r.window_index) + ", expected " +
                        std::to_string(index));
      }
      rubric::validate(r);
      rating = std::move(r);
    });
    if (!ok) return false;

    const ActionVector v = rubric::assemble_action_vector(*rating);
    const double pen = rubric::penalty_intensity(*rating);
    const WindowRecord rec = traj_->apply(v, pen);
    WindowLog log{index,          turn_ - static_cast<int>(buffer_.size()) + 1,
                  turn_,          *rating,
                  v,              pen,
                  rec.work.delta_e, rec.work.cos_theta,
                  rec.state_before, rec.state_after,
                  GateOutcome::kContinue};
    buffer_.clear();

    stagnation_ = rec.work.delta_e > 0.0 ? 0 : stagnation_ + 1;
    reward.delta_e = rec.work.delta_e;
    reward.window_closed = true;
    reward.regression = rec.work.delta_e < 0.0;
    reward.stagnation_streak = stagnation_;
    info["window"] = json(*rating);

    log.gate = check_gate(*traj_, cfg_.gate);
    result_.windows.push_back(log);
    info["gate"] = std::string(to_string(log.gate));
    if (log.gate == GateOutcome::kSuccess) {
      finish(TerminationType::kSuccess);
      return true;
    }
    if (log.gate == GateOutcome::kFailure) {
      finish(TerminationType::kEpmFailure);
      return true;
    }

    const agents::EpmSummary s = summary();
    std::optional<agents::DirectorDecision> d;
    if (!guarded_call("director", [&] {
          auto decision = b_.director.decide(result_.history, s);
          validate_action(decision.action);
          d = std::move(decision);
        })) {
      return false;
    }
    result_.decisions.push_back({index, turn_, s, *d});
    info["director"] = json{{"guidance", d->guidance}, {"action", d->action}};
    apply_decision(*d);
    return true;
  }

  void validate_action(const agents::DirectorAction& a) const {
    using K = agents::DirectorAction::Kind;
    if (a.kind == K::kReleaseMemory && !scenario::memory_block(scenario_.persona, a.argument)) {
      throw Error(ErrorCode::kInvalidDirectorAction, "unknown memory key '" + a.argument + "'");
    }
    if (a.kind == K::kAdjustGuidance && a.argument.empty()) {
      throw Error(ErrorCode::kInvalidDirectorAction, "AdjustGuidance needs text");
    }
  }

  void apply_decision(const agents::DirectorDecision& d) {
    using K = agents::DirectorAction::Kind;
    if (!d.guidance.empty()) guidance_ = d.guidance;
    switch (d.action.kind) {
      case K::kContinue: break;
      case K::kReleaseMemory:
        if (std::find(released_.begin(), released_.end(), d.action.argument) == released_.end()) {
          released_.push_back(d.action.argument);
        }
        break;
      case K::kAdjustGuidance: guidance_ = d.action.argument; break;
      case K::kAdjustPacing: pacing_ = d.action.pacing; break;
      case K::kTerminate: finish(TerminationType::kDirectorStop); break;
    }
  }

  StepPacket packet(Reward reward, json info) const {
    StepPacket p;
    p.state = summary();
    p.reward = reward;
    p.done = done_;
    p.termination = result_.termination;
    p.info = std::move(info);
    return p;
  }

  const scenario::Scenario& scenario_;
  Backends b_;
  EpisodeConfig cfg_;
  EpisodeResult result_;
  std::optional<TrajectoryState> traj_;
  agents::History buffer_;
  std::string guidance_;
  agents::Pacing pacing_ = agents::Pacing::kHold;
  std::vector<std::string> released_;
  std::string pending_user_;
  int stagnation_ = 0;
  int turn_ = 0;
  bool done_ = false;
};

inline EpisodeResult run_episode(const scenario::Scenario& s, Backends b,
                                 const EpisodeConfig& cfg) {
  EpisodeEngine engine(s, b, cfg);
  engine.reset();
  while (!engine.done()) {
    const auto reply = engine.test_reply();
    if (!reply) break;
    engine.step(*reply);
  }
  return engine.result();
}

// reset/step facade for external drivers that supply the test model's text.
class Env {
 public:
  StepPacket reset(const scenario::Scenario& s, Backends b, const EpisodeConfig& cfg) {
    scenario_ = s;
    engine_.emplace(scenario_, b, cfg);
    return engine_->reset();
  }

  StepPacket step(const std::string& test_model_message) {
    if (!engine_) throw Error(ErrorCode::kConfigError, "step before reset");
    return engine_->step(test_model_message);
  }

  bool done() const { return engine_ && engine_->done(); }
  const std::string& user_message() const { return engine_->pending_user_message(); }
  const EpisodeResult& result() const { return engine_->result(); }

 private:
  scenario::Scenario scenario_;
  std::optional<EpisodeEngine> engine_;
};

// ---------------------------------------------------------------------------
// Batches

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::uint64_t episode_seed(std::uint64_t run_seed, std::string_view scenario_id) {
  std::uint64_t z = run_seed ^ fnv1a(scenario_id);
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

struct OwnedBackends {
  std::unique_ptr<agents::UserBackend> user;
  std::unique_ptr<agents::TestBackend> test;
  std::unique_ptr<agents::JudgeBackend> judge;
  std::unique_ptr<agents::DirectorBackend> director;
  Backends view() { return {*user, *test, *judge, *director}; }
};

using BackendFactory =
    std::function<OwnedBackends(const scenario::Scenario&, std::uint64_t episode_seed)>;

// Runs every scenario with fresh backends, cfg.parallelism at a time.
// Results come back in input order; `on_done` may be called from workers.
inline std::vector<EpisodeResult> run_batch(
    const std::vector<scenario::Scenario>& scenarios, const BackendFactory& factory,
    const EpisodeConfig& cfg,
    const std::function<void(std::size_t, const EpisodeResult&)>& on_done = {}) {
  cfg.validate();
  std::vector<EpisodeResult> out(scenarios.size());
  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::exception_ptr first_error;
  auto worker = [&] {
    for (std::size_t i = next++; i < scenarios.size(); i = next++) {
      try {
        auto backends = factory(scenarios[i], episode_seed(cfg.seed, scenarios[i].id));
        EpisodeConfig episode_cfg = cfg;
        episode_cfg.seed = episode_seed(cfg.seed, scenarios[i].id);
        out[i] = run_episode(scenarios[i], backends.view(), episode_cfg);
        if (on_done) on_done(i, out[i]);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  const auto n = std::min<std::size_t>(static_cast<std::size_t>(cfg.parallelism),
                                       std::max<std::size_t>(scenarios.size(), 1));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
  return out;
}

// ---------------------------------------------------------------------------
// JSON

inline void to_json(json& j, const WindowLog& w) {
  j = json{{"window", w.window},
           {"first_turn", w.first_turn},
           {"last_turn", w.last_turn},
           {"rating", w.rating},
           {"action", w.action},
           {"penalty", w.penalty},
           {"delta_e", w.delta_e},
           {"cos_theta", w.cos_theta ? json(*w.cos_theta) : json(nullptr)},
           {"state_before", w.state_before},
           {"state_after", w.state_after},
           {"gate", std::string(to_string(w.gate))}};
}

inline GateOutcome parse_gate_outcome(std::string_view s) {
  if (s == "SUCCESS") return GateOutcome::kSuccess;
  if (s == "FAILURE") return GateOutcome::kFailure;
  if (s == "CONTINUE") return GateOutcome::kContinue;
  throw Error(ErrorCode::kCorruptLog, "unknown gate outcome '" + std::string(s) + "'");
}

inline void from_json(const json& j, WindowLog& w) {
  w.window = j.at("window").get<int>();
  w.first_turn = j.at("first_turn").get<int>();
  w.last_turn = j.at("last_turn").get<int>();
  w.rating = j.at("rating").get<rubric::MdepWindowRating>();
  w.action = j.at("action").get<ActionVector>();
  w.penalty = j.at("penalty").get<double>();
  w.delta_e = j.at("delta_e").get<double>();
  w.cos_theta = j.at("cos_theta").is_null()
                    ? std::nullopt
                    : std::optional<double>(j.at("cos_theta").get<double>());
  w.state_before = j.at("state_before").get<PsychState>();
  w.state_after = j.at("state_after").get<PsychState>();
  w.gate = parse_gate_outcome(j.at("gate").get<std::string>());
}

inline void to_json(json& j, const DirectorLog& d) {
  j = json{{"window", d.window},
           {"turn", d.turn},
           {"summary", d.summary},
           {"guidance", d.decision.guidance},
           {"action", d.decision.action}};
}

inline void from_json(const json& j, DirectorLog& d) {
  d.window = j.at("window").get<int>();
  d.turn = j.at("turn").get<int>();
  d.summary = j.at("summary").get<agents::EpmSummary>();
  d.decision.guidance = j.at("guidance").get<std::string>();
  d.decision.action = j.at("action").get<agents::DirectorAction>();
}

inline void to_json(json& j, const EpisodeResult& r) {
  j = json{{"scenario_id", r.scenario_id},
           {"test_model", r.test_model},
           {"history", r.history},
           {"iedr", r.iedr},
           {"iedr_from_judge", r.iedr_from_judge},
           {"p0", r.p0},
           {"r0", r.r0},
           {"windows", r.windows},
           {"decisions", r.decisions},
           {"termination",
            r.termination ? json(std::string(to_string(*r.termination))) : json(nullptr)},
           {"metrics", r.metrics ? json(*r.metrics) : json(nullptr)},
           {"indices", r.indices ? json(*r.indices) : json(nullptr)},
           {"complete", r.complete},
           {"abort_reason", r.abort_reason},
           {"retries", r.retries}};
}

inline void to_json(json& j, const StepPacket& p) {
  j = json{{"state", p.state},
           {"reward",
            {{"delta_e", p.reward.delta_e},
             {"window_closed", p.reward.window_closed},
             {"regression", p.reward.regression},
             {"stagnation_streak", p.reward.stagnation_streak}}},
           {"done", p.done},
           {"termination",
            p.termination ? json(std::string(to_string(*p.termination))) : json(nullptr)},
           {"info", p.info}};
}

}  // namespace empa

#endif  // EMPA_ORCHESTRATOR_HPP_
