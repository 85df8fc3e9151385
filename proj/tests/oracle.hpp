// Independent reference computations used only by tests. Nothing here calls
// into the empa kernel; vectors are plain arrays and every quantity is
// recomputed from scratch.

#ifndef EMPA_TESTS_ORACLE_HPP_
#define EMPA_TESTS_ORACLE_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

namespace oracle {

using Vec = std::array<double, 3>;

inline double len(const Vec& v) { return std::hypot(v[0], v[1], v[2]); }

// cos of the angle between v and u via the law of cosines.
inline double cos_between(const Vec& v, const Vec& u) {
  const Vec diff = {v[0] - u[0], v[1] - u[1], v[2] - u[2]};
  const double lv = len(v), lu = len(u), ld = len(diff);
  return (lv * lv + lu * lu - ld * ld) / (2.0 * lv * lu);
}

// Projection of v onto the direction toward the origin from state.
inline double projected_work(const Vec& v, const Vec& toward) {
  double acc = 0.0;
  const double l = len(toward);
  for (int i = 0; i < 3; ++i) acc += v[i] * (toward[i] / l);
  return acc;
}

// Literal key tables.
inline constexpr int kIedr[3][4] = {{0, -2, -4, -6}, {0, -3, -6, -9}, {0, -4, -8, -12}};
inline constexpr int kProg[3][3] = {{0, 1, 3}, {0, 1, 3}, {0, 1, 3}};
inline constexpr int kNeg[3][3] = {{0, -2, -4}, {0, -2, -5}, {0, -2, -5}};  // index |level|

struct Window {
  Vec v{};
  double penalty = 0.0;
};

struct Result {
  Vec final_state{};
  double e_total = 0.0;
  double path = 0.0;
  std::vector<double> delta_e;
  std::vector<double> magnitude;
  std::vector<double> cos;  // NaN for null actions
  std::vector<Vec> states;  // P_0 .. P_T
  // Metric fields.
  double rdi = 0.0, rho = 0.0, s_proj = 0.0, tau = 0.0, mean_cos = 0.0;
  double r_pos = 0.0, r_pen = 0.0, s_net = 0.0;
};

// From-scratch replay. At equilibrium the last well-defined direction is
// reused; the state is clamped at zero after each window.
inline Result replay(const Vec& p0, const std::vector<Window>& windows) {
  Result r;
  Vec state = p0;
  Vec toward = {-p0[0], -p0[1], -p0[2]};
  r.states.push_back(state);
  for (const auto& w : windows) {
    if (len(state) > 0.0) toward = {-state[0], -state[1], -state[2]};
    const double mag = len(w.v);
    double de = mag == 0.0 ? 0.0 : projected_work(w.v, toward);
    if (std::abs(de) <= 1e-12 * mag) de = 0.0;
    r.delta_e.push_back(de);
    r.magnitude.push_back(mag);
    r.cos.push_back(mag == 0.0 ? std::nan("") : cos_between(w.v, toward));
    for (int i = 0; i < 3; ++i) state[i] = std::min(state[i] + w.v[i], 0.0);
    r.states.push_back(state);
  }
  r.final_state = state;
  for (double d : r.delta_e) r.e_total += d;
  for (double m : r.magnitude) r.path += m;

  const double n = static_cast<double>(windows.size());
  const double r0 = len(p0);
  r.rdi = std::clamp((r0 - len(state)) / std::max(r0, 1e-6), -1.0, 1.0);
  r.rho = r.e_total / n;
  double proj = 0.0, cs = 0.0, pen = 0.0;
  int nz = 0, pos = 0;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    r.s_net += windows[i].v[0] + windows[i].v[1] + windows[i].v[2];
    pen += windows[i].penalty;
    if (r.delta_e[i] > 0.0) ++pos;
    if (r.magnitude[i] > 0.0) {
      proj += r.delta_e[i];
      cs += r.cos[i];
      ++nz;
    }
  }
  r.s_proj = nz ? proj / nz : 0.0;
  r.mean_cos = nz ? cs / nz : 0.0;
  r.r_pos = pos / n;
  r.r_pen = pen / n;
  const Vec disp = {state[0] - p0[0], state[1] - p0[1], state[2] - p0[2]};
  r.tau = std::clamp(r.path / std::max(len(disp), 1e-6), 1.0, 3.0);
  return r;
}

}  // namespace oracle

#endif  // EMPA_TESTS_ORACLE_HPP_
