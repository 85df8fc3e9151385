#ifndef EMPA_METRICS_HPP_
#define EMPA_METRICS_HPP_

// Raw EPM metrics, their EPM-Q indices, and the dimension synthesis.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "empa/epm.hpp"
#include "empa/error.hpp"

namespace empa::metrics {

// Largest single-window action norm on the [-2, 2]^3 scale: sqrt(12).
inline const double kRhoMax = std::sqrt(12.0);
// Ratio between the l1-like net score and l2 displacement.
inline constexpr double kDefaultAlpha = 1.2;

struct MetricBundle {
  TerminationType status = TerminationType::kMaxTurns;
  double rdi_raw = 0.0;
  double e_total = 0.0;
  double e_surplus = 0.0;
  double s_net = 0.0;
  double rho = 0.0;
  double s_proj = 0.0;
  double tortuosity_raw = 1.0;
  // 0 when no window had a nonzero action.
  double mean_cos = 0.0;
  double r_pos = 0.0;
  double r_pen = 0.0;

  friend bool operator==(const MetricBundle&, const MetricBundle&) = default;
};

inline MetricBundle raw_metrics(const TrajectoryState& traj, TerminationType status) {
  const auto& windows = traj.windows();
  if (windows.empty()) {
    throw Error(ErrorCode::kEmptyTrajectory, "no adjudicated windows");
  }
  const double r0 = traj.r0();
  const double final_r = resistance(traj.current());
  const double count = static_cast<double>(windows.size());

  MetricBundle m;
  m.status = status;
  m.rdi_raw = std::clamp((r0 - final_r) / guarded(r0), -1.0, 1.0);
  m.e_total = traj.e_total();
  m.e_surplus = m.e_total - r0;
  m.rho = m.e_total / count;

  double proj_sum = 0.0;
  double cos_sum = 0.0;
  double pen_sum = 0.0;
  std::size_t nonzero = 0;
  std::size_t positive = 0;
  for (const auto& w : windows) {
    m.s_net += w.action.sum();
    pen_sum += w.penalty;
    if (w.work.delta_e > 0.0) ++positive;
    if (w.work.magnitude > 0.0) {
      proj_sum += w.work.delta_e;
      cos_sum += w.work.cos_theta.value_or(0.0);
      ++nonzero;
    }
  }
  if (nonzero > 0) {
    m.s_proj = proj_sum / static_cast<double>(nonzero);
    m.mean_cos = cos_sum / static_cast<double>(nonzero);
  }
  m.r_pos = static_cast<double>(positive) / count;
  m.r_pen = pen_sum / count;

  const double displacement = resistance(traj.current() - traj.initial());
  m.tortuosity_raw = std::clamp(traj.path_length() / guarded(displacement), 1.0, 3.0);
  return m;
}

// Linear map of a raw range onto [0, 100]; x0 scores 0 and x100 scores 100.
struct MappingSpec {
  double x0 = 0.0;
  double x100 = 1.0;
};

inline double phi_map(double x, const MappingSpec& spec) {
  if (spec.x0 == spec.x100) {
    throw Error(ErrorCode::kDegenerateSpec, "mapping boundaries coincide");
  }
  return std::clamp(100.0 * ((x - spec.x0) / (spec.x100 - spec.x0)), 0.0, 100.0);
}

inline constexpr MappingSpec kRdiSpec{-1.0, 1.0};
inline constexpr MappingSpec kAlignSpec{-1.0, 1.0};
inline constexpr MappingSpec kTauSpec{3.0, 1.0};
inline constexpr MappingSpec kPenSpec{3.0, 0.0};
inline constexpr MappingSpec kRposSpec{0.0, 1.0};

struct IndexBundle {
  double idx_rdi = 0.0;
  double idx_etot = 0.0;
  double idx_snet = 0.0;
  double idx_rho = 0.0;
  double idx_sproj = 0.0;
  double idx_tau = 0.0;
  double idx_rpos = 0.0;
  double idx_align = 0.0;
  double idx_pen = 0.0;
  double outcome = 0.0;
  double efficiency = 0.0;
  double stability = 0.0;
  double epm_index = 0.0;

  friend bool operator==(const IndexBundle&, const IndexBundle&) = default;
};

struct UnboundedIndices {
  double idx_etot = 0.0;
  double idx_snet = 0.0;
  double idx_rho = 0.0;
  double idx_sproj = 0.0;
};

// Open-ended indices: 100 marks the benchmark, values above reward excess.
inline UnboundedIndices unbounded_indices(const MetricBundle& m, double r0,
                                          double alpha = kDefaultAlpha) {
  UnboundedIndices u;
  u.idx_etot = 100.0 * std::max(0.0, m.e_total) / guarded(r0);
  u.idx_snet = 100.0 * std::max(0.0, m.s_net) / guarded(alpha * r0);
  u.idx_rho = 100.0 * std::max(0.0, m.rho) / kRhoMax;
  u.idx_sproj = 100.0 * std::max(0.0, m.s_proj) / kRhoMax;
  return u;
}

// Fills the three dimension means and the 0.4 / 0.2 / 0.4 synthesis from the
// nine indices already present in `b`.
inline IndexBundle epm_index(IndexBundle b) {
  b.outcome = (b.idx_rdi + b.idx_etot + b.idx_snet) / 3.0;
  b.efficiency = (b.idx_rho + b.idx_sproj + b.idx_tau) / 3.0;
  b.stability = (b.idx_rpos + b.idx_align + b.idx_pen) / 3.0;
  b.epm_index = 0.4 * b.outcome + 0.2 * b.efficiency + 0.4 * b.stability;
  return b;
}

inline IndexBundle compute_indices(const MetricBundle& m, double r0,
                                   double alpha = kDefaultAlpha) {
  const UnboundedIndices u = unbounded_indices(m, r0, alpha);
  IndexBundle b;
  b.idx_rdi = phi_map(m.rdi_raw, kRdiSpec);
  b.idx_etot = u.idx_etot;
  b.idx_snet = u.idx_snet;
  b.idx_rho = u.idx_rho;
  b.idx_sproj = u.idx_sproj;
  b.idx_tau = phi_map(m.tortuosity_raw, kTauSpec);
  b.idx_rpos = phi_map(m.r_pos, kRposSpec);
  b.idx_align = phi_map(m.mean_cos, kAlignSpec);
  b.idx_pen = phi_map(m.r_pen, kPenSpec);
  return epm_index(b);
}

// Dataset level: average each index over cases, then synthesise.
inline IndexBundle aggregate_indices(std::span<const IndexBundle> cases) {
  if (cases.empty()) throw Error(ErrorCode::kInsufficientData, "no cases to aggregate");
  IndexBundle mean;
  for (const auto& c : cases) {
    mean.idx_rdi += c.idx_rdi;
    mean.idx_etot += c.idx_etot;
    mean.idx_snet += c.idx_snet;
    mean.idx_rho += c.idx_rho;
    mean.idx_sproj += c.idx_sproj;
    mean.idx_tau += c.idx_tau;
    mean.idx_rpos += c.idx_rpos;
    mean.idx_align += c.idx_align;
    mean.idx_pen += c.idx_pen;
  }
  const double n = static_cast<double>(cases.size());
  mean.idx_rdi /= n;
  mean.idx_etot /= n;
  mean.idx_snet /= n;
  mean.idx_rho /= n;
  mean.idx_sproj /= n;
  mean.idx_tau /= n;
  mean.idx_rpos /= n;
  mean.idx_align /= n;
  mean.idx_pen /= n;
  return epm_index(mean);
}

// No-Physics ablation: equal-weight sum of rubric net scores, no direction.
inline double ablation_linear_score(const TrajectoryState& traj) {
  double s = 0.0;
  for (const auto& w : traj.windows()) s += w.action.sum();
  return s;
}

// Magnitude-only ablation: total action norm.
inline double ablation_magnitude_score(const TrajectoryState& traj) {
  double s = 0.0;
  for (const auto& w : traj.windows()) s += w.work.magnitude;
  return s;
}

}  // namespace empa::metrics

#endif  // EMPA_METRICS_HPP_
