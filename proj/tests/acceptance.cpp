// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "empa/config.hpp"
#include "empa/pair_set.hpp"
#include "empa/report.hpp"
#include "oracle.hpp"

namespace fs = std::filesystem;
using namespace empa;

namespace {

const fs::path kRoot = EMPA_SOURCE_DIR;

struct Check {
  bool ok = true;
  std::string why;
  void expect(bool cond, const std::string& msg) {
    if (!cond && ok) {
      ok = false;
      why = msg;
    }
  }
};

std::string num(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// 1
Check scoring_keys() {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();
  // Published key cells by weight class.
  const int standard[4] = {0, -2, -4, -6};
  const int priority[4] = {0, -3, -6, -9};
  const int core[4] = {0, -4, -8, -12};
  using rubric::Indicator;
  const std::vector<std::pair<std::vector<Indicator>, const int*>> classes = {
      {{Indicator::kC1, Indicator::kC2, Indicator::kA1, Indicator::kP1}, standard},
      {{Indicator::kC3, Indicator::kA3, Indicator::kP3}, priority},
      {{Indicator::kA2, Indicator::kP2}, core}};
  int cells = 0;
  std::set<Indicator> covered;
  for (const auto& [ids, row] : classes) {
    for (int level = 0; level < 4; ++level) {
      ++cells;
      for (auto id : ids) {
        covered.insert(id);
        const double got = rubric::iedr_score(id, level);
        c.expect(got == row[level], std::string(rubric::to_string(id)) + " level " +
                                        std::to_string(level) + " gave " + num(got));
      }
    }
  }
  c.expect(cells == 12 && covered.size() == 9, "IEDR key coverage");

  const int prog[3] = {0, 1, 3};
  const int neg_c[3] = {0, -2, -4};
  const int neg_ap[3] = {0, -2, -5};
  int mcells = 0;
  for (AxisId axis : kAxes) {
    for (int l = 0; l < 3; ++l) {
      ++mcells;
      c.expect(rubric::mdep_score(axis, rubric::Channel::kProg, l) == prog[l], "MDEP Prog cell");
      ++mcells;
      const int want = axis == AxisId::kCognitive ? neg_c[l] : neg_ap[l];
      c.expect(rubric::mdep_score(axis, rubric::Channel::kNeg, -l) == want,
               "MDEP Neg cell " + std::string(axis_letter(axis)) + std::to_string(-l));
    }
  }
  c.expect(mcells == 18, "MDEP key coverage");
  c.expect(seconds_since(t0) < 1.0, "scoring keys slower than 1 s");
  return c;
}

// 2
Check maximal_deficit() {
  Check c;
  const auto init = rubric::assemble_initial_state(rubric::uniform_assessment(3));
  c.expect(init.p0 == PsychState{-21, -27, -27}, "P0 mismatch");
  c.expect(std::abs(init.r0 - std::sqrt(1899.0)) <= 1e-9, "r0 = " + num(init.r0));
  return c;
}

// 3
Check rho_max() {
  Check c;
  c.expect(std::abs(metrics::kRhoMax - std::sqrt(12.0)) <= 1e-12, "rho_max = " + num(metrics::kRhoMax));
  c.expect(std::abs(metrics::kRhoMax - 3.464) < 5e-4, "rho_max does not round to 3.464");
  return c;
}

// 4
Check phi_boundaries() {
  Check c;
  using metrics::phi_map;
  const struct {
    metrics::MappingSpec spec;
    double at0, at100;
    const char* name;
  } rows[] = {{metrics::kRdiSpec, -1, 1, "RDI"},
              {metrics::kAlignSpec, -1, 1, "Align"},
              {metrics::kTauSpec, 3, 1, "tau"},
              {metrics::kPenSpec, 3, 0, "Pen"}};
  for (const auto& r : rows) {
    c.expect(phi_map(r.at0, r.spec) == 0.0, std::string(r.name) + " low boundary");
    c.expect(phi_map(r.at100, r.spec) == 100.0, std::string(r.name) + " high boundary");
    c.expect(std::abs(phi_map(0.5 * (r.at0 + r.at100), r.spec) - 50.0) <= 1e-9,
             std::string(r.name) + " midpoint");
  }
  return c;
}

// 5
Check published_aggregation() {
  Check c;
  metrics::IndexBundle b;
  b.idx_rdi = 99.5;
  b.idx_etot = 117.6;
  b.idx_snet = 122.0;
  b.idx_rho = 139.0;
  b.idx_sproj = 128.4;
  b.idx_tau = 96.9;
  b.idx_rpos = 91.5;
  b.idx_align = 92.4;
  b.idx_pen = 98.9;
  const auto q = metrics::epm_index(b).epm_index;
  c.expect(std::abs(q - 107.2) <= 0.05, "EPM-Q = " + num(q));
  return c;
}

// 6
Check oracle_equivalence() {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<rubric::MdepWindowRating> combos;
  std::set<std::array<double, 3>> distinct;
  for (int code = 0; code < 729; ++code) {
    int x = code;
    std::array<rubric::AxisLevels, 3> lv;
    for (auto& l : lv) {
      l.prog = x % 3;
      x /= 3;
      l.neg = -(x % 3);
      x /= 3;
    }
    combos.push_back(rubric::make_window(1, lv, "q"));
    const auto v = rubric::assemble_action_vector(combos.back());
    distinct.insert({v.c, v.a, v.p});
  }
  c.expect(distinct.size() <= 729, "too many action vectors");

  std::mt19937_64 rng(1234);
  const int cases = 10000;
  for (int n = 0; n < cases && c.ok; ++n) {
    rubric::IedrAssessment a;
    for (auto id : rubric::kIndicators) {
      const int level = static_cast<int>(rng() % 4);
      a.indicators.push_back({id, level, level ? "e" : "", ""});
    }
    const auto init = rubric::assemble_initial_state(a);
    if (init.degenerate) continue;
    TrajectoryState traj(init.p0);
    std::vector<oracle::Window> ow;
    for (int w = 0; w < 10; ++w) {
      const auto& rating = combos[rng() % combos.size()];
      const auto v = rubric::assemble_action_vector(rating);
      const double pen = rubric::penalty_intensity(rating);
      traj.apply(v, pen);
      ow.push_back({{v.c, v.a, v.p}, pen});
    }
    const auto ref = oracle::replay({init.p0.c, init.p0.a, init.p0.p}, ow);
    const auto m = metrics::raw_metrics(traj, TerminationType::kMaxTurns);
    const auto& fin = traj.current();
    auto near = [&](double x, double y, const char* what) {
      c.expect(std::abs(x - y) <= 1e-12, std::string(what) + " differs in case " + std::to_string(n) +
                                             ": " + num(x) + " vs " + num(y));
    };
    near(fin.c, ref.final_state[0], "P_T.c");
    near(fin.a, ref.final_state[1], "P_T.a");
    near(fin.p, ref.final_state[2], "P_T.p");
    near(traj.e_total(), ref.e_total, "E_total");
    near(traj.path_length(), ref.path, "path length");
    near(m.rdi_raw, ref.rdi, "RDI");
    near(m.e_total, ref.e_total, "e_total");
    near(m.e_surplus, ref.e_total - std::sqrt(init.p0.c * init.p0.c + init.p0.a * init.p0.a +
                                              init.p0.p * init.p0.p),
         "e_surplus");
    near(m.s_net, ref.s_net, "S_net");
    near(m.rho, ref.rho, "rho");
    near(m.s_proj, ref.s_proj, "S_proj");
    near(m.tortuosity_raw, ref.tau, "tau");
    near(m.mean_cos, ref.mean_cos, "mean cos");
    near(m.r_pos, ref.r_pos, "R_pos");
    near(m.r_pen, ref.r_pen, "R_pen");
  }
  c.expect(seconds_since(t0) < 30.0, "fuzz slower than 30 s");
  return c;
}

// 7
Check gate_truth_table() {
  Check c;
  GateConfig cfg;
  for (int bits = 0; bits < 8; ++bits) {
    GatePredicates g;
    g.energy = bits & 1;
    g.resolution = bits & 2;
    g.companionship = bits & 4;
    const bool want = g.energy && (g.resolution || g.companionship);
    c.expect((decide_gate(g) == GateOutcome::kSuccess) == want,
             "truth table row " + std::to_string(bits));
    g.deterioration = true;
    c.expect((decide_gate(g) == GateOutcome::kSuccess) == want,
             "truth table row " + std::to_string(bits) + " with deterioration");
  }
  // Numeric predicates: no SUCCESS at or below the energy threshold.
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int n = 0; n < 10000; ++n) {
    const double r0 = 1.0 + 40.0 * u(rng);
    const double e = cfg.energy_threshold(r0) * (2.0 * u(rng));
    const double r = r0 * 1.5 * u(rng);
    const double mc = 2.0 * u(rng) - 1.0;
    const auto out = decide_gate(gate_predicates(e, r0, r, mc, cfg));
    if (e <= cfg.energy_threshold(r0)) c.expect(out != GateOutcome::kSuccess, "SUCCESS without energy");
    const bool want = e > cfg.energy_threshold(r0) && (r < cfg.eps_dist * r0 || mc > cfg.tau_align);
    c.expect((out == GateOutcome::kSuccess) == want, "numeric gate mismatch");
  }
  const double r0 = 10.0;
  c.expect(decide_gate(gate_predicates(10.0, r0, 0.0, 1.0, cfg)) != GateOutcome::kSuccess,
           "E_total equal to threshold passed");
  return c;
}

// 8
Check direction_properties() {
  Check c;
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int n = 0; n < 10000; ++n) {
    PsychState p{-std::abs(u(rng)) - 0.1, -std::abs(u(rng)), -std::abs(u(rng))};
    ActionVector v{u(rng), u(rng), u(rng)};
    const double lambda = std::abs(u(rng)) + 0.01;
    const double de = effective_work(v, p).delta_e;
    c.expect(std::abs(effective_work(lambda * v, p).delta_e - lambda * de) <= 1e-12 * std::max(1.0, lambda * std::abs(de)) * 10,
             "scale covariance");
    c.expect(std::abs(de) <= norm(v) + 1e-12, "|dE| > |v|");
    // Orthogonal component of v relative to the ideal direction.
    const Direction d = ideal_direction(p);
    const double k = dot(v, d);
    ActionVector orth{v.c - k * d.c, v.a - k * d.a, v.p - k * d.p};
    c.expect(std::abs(effective_work(orth, p).delta_e) <= 1e-12 * std::max(1.0, norm(v)) * 10,
             "orthogonal action has work");
  }
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// 9
Check determinism() {
  Check c;
  const auto base = fs::temp_directory_path() / ("empa-acceptance-" + std::to_string(::getpid()));
  fs::remove_all(base);
  std::vector<fs::path> stores;
  for (const char* name : {"a", "b"}) {
    auto cfg = load_run_config(kRoot / "configs/scripted_benchmark.json");
    cfg.out = base / name;
    run_benchmark(cfg);
    stores.push_back(cfg.out);
  }
  std::set<fs::path> files;
  for (const auto& s : stores) {
    for (const auto& e : fs::recursive_directory_iterator(s)) {
      if (e.is_regular_file()) files.insert(fs::relative(e.path(), s));
    }
  }
  c.expect(files.size() > 90, "store has too few files");
  for (const auto& f : files) {
    c.expect(slurp(stores[0] / f) == slurp(stores[1] / f), "store file differs: " + f.string());
  }
  c.expect(slurp(stores[0] / "results/leaderboard.csv") == slurp(kRoot / "tests/golden/leaderboard.csv"),
           "leaderboard differs from golden");
  fs::remove_all(base);
  return c;
}

std::vector<perturb::PerturbationPair> score_fixture(const char* file) {
  auto set = perturb::load_pair_set(kRoot / "data/fixtures/pairs" / file);
  return perturb::score_pairs(set, perturb::judge_factory(set.judge, kRoot / "assets/prompts"));
}

// 10
Check perturbation_direction() {
  Check c;
  using perturb::Scorer;
  const auto flips = score_fixture("flip_pairs.json");
  c.expect(!flips.empty(), "no flip pairs");
  double sum = 0.0;
  for (const auto& p : flips) {
    const double d = perturb::pair_diff(p, Scorer::kFullEpm);
    sum += d;
    c.expect(d < 0.0, "flip pair " + p.pair_id + " d = " + num(d));
  }
  c.expect(sum < 0.0, "flip mean d >= 0");
  const auto syc = score_fixture("sycophancy_pairs.json");
  c.expect(!syc.empty(), "no sycophancy pairs");
  for (const auto& p : syc) {
    c.expect(perturb::pair_diff(p, Scorer::kFullEpm) < 0.0, "sycophancy FullEPM d >= 0 on " + p.pair_id);
    c.expect(perturb::pair_diff(p, Scorer::kMagnitudeOnly) > 0.0,
             "sycophancy MagnitudeOnly d <= 0 on " + p.pair_id);
  }
  return c;
}

// 11
Check ablation_ties() {
  Check c;
  using perturb::Scorer;
  for (const auto& p : score_fixture("flip_pairs.json")) {
    c.expect(std::abs(perturb::pair_diff(p, Scorer::kNoPhysics)) <= 1e-12, "NoPhysics not tied on " + p.pair_id);
    c.expect(std::abs(perturb::pair_diff(p, Scorer::kFullEpm)) > 1e-9, "FullEPM tied on " + p.pair_id);
  }
  // Direction-permuted actions with the same net score, all starting states.
  std::mt19937_64 rng(11);
  for (int n = 0; n < 1000; ++n) {
    perturb::SideTrace a, b;
    a.p0 = b.p0 = PsychState{-double(1 + rng() % 21), -double(1 + rng() % 27), -double(1 + rng() % 27)};
    for (int w = 0; w < 3; ++w) {
      const ActionVector v{double(rng() % 4), double(rng() % 4), double(rng() % 4)};
      a.actions.push_back(v);
      b.actions.push_back({v.p, v.c, v.a});
    }
    const double dn = perturb::aggregate(b, Scorer::kNoPhysics) - perturb::aggregate(a, Scorer::kNoPhysics);
    c.expect(dn == 0.0, "NoPhysics changed under a permutation");
  }
  return c;
}

// 12
Check statistics() {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<double> four{-1.0, -0.5, -2.0, -0.25};
  const auto st = perturb::paired_stats(four, 1000, 0);
  c.expect(st.p_value && *st.p_value == 0.0625, "sign test p = " + (st.p_value ? num(*st.p_value) : "none"));
  std::mt19937_64 rng(2026);
  const double mu = 0.75;
  std::normal_distribution<double> dist(mu, 2.0);
  int covered = 0;
  const int reps = 1000;
  for (int r = 0; r < reps; ++r) {
    std::vector<double> d(50);
    for (auto& x : d) x = dist(rng);
    const auto s = perturb::paired_stats(d, 1000, static_cast<std::uint64_t>(r));
    covered += s.ci_low <= mu && mu <= s.ci_high;
  }
  c.expect(covered >= 900, "coverage " + std::to_string(covered) + "/1000");
  c.expect(seconds_since(t0) < 60.0, "statistics slower than 60 s");
  return c;
}

// 13
Check banding() {
  Check c;
  using B = scenario::DifficultyBand;
  c.expect(scenario::difficulty_band(40.0) == B::kExtreme, "r0 = 40");
  c.expect(scenario::difficulty_band(20.0) == B::kEasy, "r0 = 20");
  int last = 0;
  std::set<B> seen;
  for (int i = 0; i <= 600000; ++i) {
    const double r0 = i * 1e-4;
    const B b = scenario::difficulty_band(r0);
    seen.insert(b);
    c.expect(static_cast<int>(b) >= last, "bands not monotone at " + num(r0));
    last = static_cast<int>(b);
  }
  c.expect(seen.size() == 4, "not every band reached");
  const double mu = 32.32, sd = 4.52;
  c.expect(scenario::difficulty_band(mu - sd) == B::kMedium && scenario::difficulty_band(mu) == B::kMedium,
           "Medium band edges");
  c.expect(scenario::difficulty_band(mu + sd) == B::kHard, "Hard upper edge");
  return c;
}

// 14
Check offline_suite(double own_seconds) {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();
  for (const char* bin : {EMPA_TEST_CORE, EMPA_TEST_RUNTIME, EMPA_TEST_DATA}) {
    const std::string cmd = std::string(bin) + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    c.expect(status == 0, std::string(bin) + " failed");
  }
  const double total = own_seconds + seconds_since(t0);
  c.expect(total < 300.0, "offline suite took " + num(total) + " s");
  return c;
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<std::pair<std::string, std::function<Check()>>> criteria = {
      {"scoring-key conformance", scoring_keys},
      {"maximal deficit state", maximal_deficit},
      {"rho_max constant", rho_max},
      {"phi boundary suite", phi_boundaries},
      {"published aggregation", published_aggregation},
      {"oracle equivalence", oracle_equivalence},
      {"gate truth table", gate_truth_table},
      {"direction properties", direction_properties},
      {"end-to-end determinism", determinism},
      {"perturbation direction", perturbation_direction},
      {"ablation tie structure", ablation_ties},
      {"statistics sanity", statistics},
      {"difficulty banding", banding},
  };
  int failed = 0;
  int index = 0;
  auto report = [&](const std::string& name, const Check& c, double secs) {
    ++index;
    std::printf("%s %2d %-26s %.3fs%s%s\n", c.ok ? "PASS" : "FAIL", index, name.c_str(), secs,
                c.ok ? "" : "  ", c.why.c_str());
    failed += !c.ok;
  };
  for (const auto& [name, fn] : criteria) {
    const auto t = std::chrono::steady_clock::now();
    Check c;
    try {
      c = fn();
    } catch (const std::exception& e) {
      c.ok = false;
      c.why = std::string("exception: ") + e.what();
    }
    report(name, c, seconds_since(t));
  }
  const auto t = std::chrono::steady_clock::now();
  const Check suite = offline_suite(seconds_since(t0));
  report("offline suite under 5 min", suite, seconds_since(t));
  std::fflush(stdout);
  return failed == 0 ? 0 : 1;
}
