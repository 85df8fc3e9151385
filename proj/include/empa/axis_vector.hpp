#ifndef EMPA_AXIS_VECTOR_HPP_
#define EMPA_AXIS_VECTOR_HPP_

#include <array>
#include <cmath>
#include <string>
#include <string_view>

#include "empa/error.hpp"

namespace empa {

// The three latent axes, always ordered (C, A, P).
enum class AxisId { kCognitive = 0, kAffective = 1, kProactive = 2 };

inline constexpr std::array<AxisId, 3> kAxes = {
    AxisId::kCognitive, AxisId::kAffective, AxisId::kProactive};

constexpr std::size_t index_of(AxisId axis) {
  return static_cast<std::size_t>(axis);
}

constexpr std::string_view axis_letter(AxisId axis) {
  switch (axis) {
    case AxisId::kCognitive: return "C";
    case AxisId::kAffective: return "A";
    case AxisId::kProactive: return "P";
  }
  return "?";
}

constexpr std::string_view axis_name(AxisId axis) {
  switch (axis) {
    case AxisId::kCognitive: return "cognitive";
    case AxisId::kAffective: return "affective";
    case AxisId::kProactive: return "proactive";
  }
  return "?";
}

// Accepts the single letter or the lower-case name. "motivational" is the
// persona-card spelling of the proactive axis.
inline AxisId parse_axis(std::string_view text) {
  if (text == "C" || text == "cognitive") return AxisId::kCognitive;
  if (text == "A" || text == "affective") return AxisId::kAffective;
  if (text == "P" || text == "proactive" || text == "motivational") {
    return AxisId::kProactive;
  }
  throw Error(ErrorCode::kConfigError, "unknown axis '" + std::string(text) + "'");
}

// A 3-vector over (C, A, P). The tag keeps states, actions, and directions
// from being mixed up by accident; dot products across tags are allowed.
template <class Tag>
struct AxisVector {
  double c = 0.0;
  double a = 0.0;
  double p = 0.0;

  constexpr double& operator[](AxisId axis) {
    return axis == AxisId::kCognitive ? c : axis == AxisId::kAffective ? a : p;
  }
  constexpr double operator[](AxisId axis) const {
    return axis == AxisId::kCognitive ? c : axis == AxisId::kAffective ? a : p;
  }

  constexpr bool all_finite() const {
    return std::isfinite(c) && std::isfinite(a) && std::isfinite(p);
  }
  constexpr double sum() const { return c + a + p; }

  friend constexpr bool operator==(const AxisVector&, const AxisVector&) = default;
};

template <class Tag>
constexpr AxisVector<Tag> operator*(double k, const AxisVector<Tag>& v) {
  return {k * v.c, k * v.a, k * v.p};
}

template <class Tag>
constexpr AxisVector<Tag> operator-(const AxisVector<Tag>& v) {
  return {-v.c, -v.a, -v.p};
}

template <class TagA, class TagB>
constexpr double dot(const AxisVector<TagA>& x, const AxisVector<TagB>& y) {
  return x.c * y.c + x.a * y.a + x.p * y.p;
}

template <class Tag>
double norm(const AxisVector<Tag>& v) {
  return std::sqrt(dot(v, v));
}

struct StateTag {};
struct ActionTag {};
struct DirectionTag {};

// Latent deficit vector. Components are <= 0; the origin is equilibrium.
using PsychState = AxisVector<StateTag>;
// Per-window net increment (progress minus regression) on each axis.
using ActionVector = AxisVector<ActionTag>;
// Unit vector.
using Direction = AxisVector<DirectionTag>;

inline PsychState operator+(const PsychState& s, const ActionVector& v) {
  return {s.c + v.c, s.a + v.a, s.p + v.p};
}

inline PsychState operator-(const PsychState& x, const PsychState& y) {
  return {x.c - y.c, x.a - y.a, x.p - y.p};
}

}  // namespace empa

#endif  // EMPA_AXIS_VECTOR_HPP_
