#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "empa/metrics.hpp"
#include "oracle.hpp"

namespace empa::metrics {
namespace {

TrajectoryState run(PsychState p0, const std::vector<ActionVector>& vs) {
  TrajectoryState t(p0);
  for (const auto& v : vs) t.apply(v);
  return t;
}

TEST(RawMetrics, PerfectSingleStepResolution) {
  const auto t = run({-3, 0, -4}, {{3, 0, 4}});
  const auto m = raw_metrics(t, TerminationType::kSuccess);
  EXPECT_DOUBLE_EQ(m.rdi_raw, 1.0);
  EXPECT_DOUBLE_EQ(m.tortuosity_raw, 1.0);
  EXPECT_DOUBLE_EQ(m.mean_cos, 1.0);
  EXPECT_DOUBLE_EQ(m.r_pos, 1.0);
  EXPECT_DOUBLE_EQ(m.e_surplus, 0.0);
  EXPECT_EQ(m.status, TerminationType::kSuccess);
}

TEST(RawMetrics, ClosedLoopSaturatesTortuosity) {
  const auto t = run({-5, 0, 0}, {{1, 0, 0}, {-1, 0, 0}});
  EXPECT_DOUBLE_EQ(raw_metrics(t, TerminationType::kMaxTurns).tortuosity_raw, 3.0);
}

TEST(RawMetrics, DeteriorationGivesNegativeRdi) {
  const auto t = run({-40, 0, 0}, {{-5, 0, 0}, {-5, 0, 0}});
  EXPECT_NEAR(raw_metrics(t, TerminationType::kMaxTurns).rdi_raw, -0.25, 1e-12);
}

TEST(RawMetrics, RdiClampedAtMinusOne) {
  const auto t = run({-2, 0, 0}, {{-5, 0, 0}, {-5, 0, 0}});
  EXPECT_DOUBLE_EQ(raw_metrics(t, TerminationType::kEpmFailure).rdi_raw, -1.0);
}

TEST(RawMetrics, EmptyTrajectory) {
  TrajectoryState t(PsychState{-1, 0, 0});
  EXPECT_THROW(raw_metrics(t, TerminationType::kMaxTurns), Error);
}

TEST(RawMetrics, NullWindowsSplitRhoAndProjection) {
  const auto t = run({-3, 0, -4}, {{2, 0, 0}, {0, 0, 0}});
  const auto m = raw_metrics(t, TerminationType::kMaxTurns);
  EXPECT_NEAR(m.rho, 0.6, 1e-12);
  EXPECT_NEAR(m.s_proj, 1.2, 1e-12);
  EXPECT_NEAR(m.mean_cos, 0.6, 1e-12);
  EXPECT_NEAR(m.r_pos, 0.5, 1e-12);
}

TEST(PhiMap, BoundaryCells) {
  EXPECT_EQ(phi_map(1.0, kRdiSpec), 100.0);
  EXPECT_EQ(phi_map(-1.0, kRdiSpec), 0.0);
  EXPECT_EQ(phi_map(3.0, kTauSpec), 0.0);
  EXPECT_EQ(phi_map(1.0, kTauSpec), 100.0);
  EXPECT_NEAR(phi_map(0.0, kRdiSpec), 50.0, 1e-12);
}

TEST(PhiMap, DegenerateSpec) {
  EXPECT_THROW(phi_map(0.0, MappingSpec{1.0, 1.0}), Error);
}

TEST(PhiMap, MonotoneInSpecDirection) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int i = 0; i < 5000; ++i) {
    MappingSpec spec{u(rng), u(rng)};
    if (spec.x0 == spec.x100) continue;
    double x = u(rng), y = u(rng);
    if (x > y) std::swap(x, y);
    if (spec.x100 > spec.x0) {
      EXPECT_LE(phi_map(x, spec), phi_map(y, spec));
    } else {
      EXPECT_GE(phi_map(x, spec), phi_map(y, spec));
    }
    EXPECT_NEAR(phi_map(0.5 * (spec.x0 + spec.x100), spec), 50.0, 1e-9);
    EXPECT_EQ(phi_map(spec.x0, spec), 0.0);
    EXPECT_EQ(phi_map(spec.x100, spec), 100.0);
  }
}

TEST(UnboundedIndices, Benchmarks) {
  MetricBundle m;
  const double r0 = std::sqrt(1899.0);
  m.e_total = r0;
  m.s_net = 1.2 * r0;
  m.rho = std::sqrt(12.0);
  m.s_proj = -1.0;
  const auto u = unbounded_indices(m, r0);
  EXPECT_NEAR(u.idx_etot, 100.0, 1e-9);
  EXPECT_NEAR(u.idx_snet, 100.0, 1e-9);
  EXPECT_NEAR(u.idx_rho, 100.0, 1e-12);
  EXPECT_EQ(u.idx_sproj, 0.0);
}

TEST(RhoMax, IsRootTwelve) {
  EXPECT_NEAR(kRhoMax, 3.4641016151377544, 1e-12);
  EXPECT_NEAR(kRhoMax, oracle::len({2, 2, 2}), 1e-12);
}

TEST(EpmIndex, AnchorsAndPublishedRow) {
  IndexBundle all100{100, 100, 100, 100, 100, 100, 100, 100, 100};
  EXPECT_NEAR(epm_index(all100).epm_index, 100.0, 1e-12);
  EXPECT_EQ(epm_index(IndexBundle{}).epm_index, 0.0);

  IndexBundle row{99.5, 117.6, 122.0, 139.0, 128.4, 96.9, 91.5, 92.4, 98.9};
  const auto out = epm_index(row);
  EXPECT_NEAR(out.epm_index, 107.2, 0.05);
  EXPECT_NEAR(out.outcome, (99.5 + 117.6 + 122.0) / 3.0, 1e-9);
  EXPECT_NEAR(out.epm_index, 0.4 * out.outcome + 0.2 * out.efficiency + 0.4 * out.stability,
              1e-9);
}

TEST(AggregateIndices, AveragesBeforeSynthesis) {
  IndexBundle a{100, 100, 100, 100, 100, 100, 100, 100, 100};
  IndexBundle b{};
  const std::vector<IndexBundle> cases{epm_index(a), epm_index(b)};
  EXPECT_NEAR(aggregate_indices(cases).epm_index, 50.0, 1e-12);
  EXPECT_THROW(aggregate_indices(std::span<const IndexBundle>{}), Error);
}

TEST(Ablation, LinearScoreSumsNetScores) {
  const auto t = run({-10, -10, -10}, {{1, 1, 0}, {-1, 0, 0}, {1, 1, 1}});
  EXPECT_EQ(ablation_linear_score(t), 4.0);
  EXPECT_EQ(ablation_linear_score(run({-1, 0, 0}, {{0, 0, 0}})), 0.0);
}

TEST(Ablation, MisalignedHighMagnitudeWindow) {
  const auto t = run({-1, 0, 0}, {{3, 3, 3}});
  EXPECT_EQ(ablation_linear_score(t), 9.0);
  EXPECT_NEAR(t.e_total(), 3.0, 1e-12);
  EXPECT_NEAR(ablation_magnitude_score(t), std::sqrt(27.0), 1e-12);
}

TEST(Ablation, MagnitudeRisesWhileWorkFalls) {
  const PsychState p0{-6, -21, -12};
  const auto genuine = run(p0, {{1, 3, 1}});
  const auto sycophantic = run(p0, {{-1, -2, -5}});
  EXPECT_GT(ablation_magnitude_score(sycophantic), ablation_magnitude_score(genuine));
  EXPECT_LT(sycophantic.e_total(), genuine.e_total());
}

// Property: scaling every deficit and every action leaves idx_etot fixed.
TEST(IndexProperty, ScenarioNormalizationInvariance) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> s(-27.0, -1.0), a(-5.0, 3.0), lam(0.5, 4.0);
  for (int i = 0; i < 2000; ++i) {
    const PsychState p0{s(rng), s(rng), s(rng)};
    std::vector<ActionVector> vs(5);
    for (auto& v : vs) v = {a(rng), a(rng), a(rng)};
    const double l = lam(rng);
    std::vector<ActionVector> scaled;
    for (const auto& v : vs) scaled.push_back(l * v);
    const auto t1 = run(p0, vs);
    const auto t2 = run(l * p0, scaled);
    const auto i1 = compute_indices(raw_metrics(t1, TerminationType::kMaxTurns), t1.r0());
    const auto i2 = compute_indices(raw_metrics(t2, TerminationType::kMaxTurns), t2.r0());
    EXPECT_NEAR(i1.idx_etot, i2.idx_etot, 1e-9);
  }
}

std::vector<ActionVector> random_actions(std::mt19937_64& rng, int n, double zero_prob) {
  std::uniform_real_distribution<double> a(-5.0, 3.0), u(0.0, 1.0);
  std::vector<ActionVector> vs;
  for (int i = 0; i < n; ++i) {
    if (u(rng) < zero_prob) {
      vs.push_back({});
    } else {
      vs.push_back({a(rng), a(rng), a(rng)});
    }
  }
  return vs;
}

TEST(MetricProperty, BoundsHoldUnderFuzzing) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> s(-27.0, 0.0);
  std::uniform_int_distribution<int> len(1, 30);
  for (int i = 0; i < 10000; ++i) {
    PsychState p0{s(rng), s(rng), s(rng) - 0.1};
    const auto t = run(p0, random_actions(rng, len(rng), 0.1));
    const auto m = raw_metrics(t, TerminationType::kMaxTurns);
    ASSERT_GE(m.r_pos, 0.0);
    ASSERT_LE(m.r_pos, 1.0);
    ASSERT_GE(m.rdi_raw, -1.0);
    ASSERT_LE(m.rdi_raw, 1.0);
    ASSERT_GE(m.tortuosity_raw, 1.0);
    ASSERT_LE(m.tortuosity_raw, 3.0);
    const auto idx = compute_indices(m, t.r0());
    for (double bounded : {idx.idx_rdi, idx.idx_tau, idx.idx_rpos, idx.idx_align, idx.idx_pen}) {
      ASSERT_GE(bounded, 0.0);
      ASSERT_LE(bounded, 100.0);
    }
  }
}

TEST(MetricProperty, RhoAndProjectionCoincideWithoutNullWindows) {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 2000; ++i) {
    const auto t = run({-20, -15, -10}, random_actions(rng, 8, 0.0));
    const auto m = raw_metrics(t, TerminationType::kMaxTurns);
    EXPECT_EQ(m.rho, m.s_proj);
  }
  const auto t = run({-20, -15, -10}, {{1, 1, 1}, {0, 0, 0}});
  const auto m = raw_metrics(t, TerminationType::kMaxTurns);
  EXPECT_NE(m.rho, m.s_proj);
}

}  // namespace
}  // namespace empa::metrics
