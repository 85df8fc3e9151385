#ifndef EMPA_JSON_HPP_
#define EMPA_JSON_HPP_

// nlohmann::json conversions for kernel, rubric, and metric types. Vectors
// are written as [c, a, p] arrays.

#include <string>

#include <nlohmann/json.hpp>

#include "empa/axis_vector.hpp"
#include "empa/epm.hpp"
#include "empa/error.hpp"
#include "empa/metrics.hpp"
#include "empa/rubric.hpp"

namespace empa {

using json = nlohmann::json;

namespace detail {

// Levels must arrive as JSON integers; 2.0, "2" and the like are rejected.
inline int strict_int(const json& j, const char* key, ErrorCode code) {
  if (!j.is_object() || !j.contains(key)) {
    throw Error(code, std::string("missing field '") + key + "'");
  }
  const json& v = j.at(key);
  if (!v.is_number_integer()) {
    throw Error(code, std::string("field '") + key + "' must be an integer");
  }
  return v.get<int>();
}

inline std::string text_field(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return {};
  const json& v = j.at(key);
  if (v.is_string()) return v.get<std::string>();
  // Judges sometimes emit the "no quote" marker as a bare 0.
  if (v.is_number()) return v.dump();
  throw Error(ErrorCode::kMalformedJudgeOutput, std::string("field '") + key + "' must be text");
}

}  // namespace detail

template <class Tag>
void to_json(json& j, const AxisVector<Tag>& v) {
  j = json::array({v.c, v.a, v.p});
}

template <class Tag>
void from_json(const json& j, AxisVector<Tag>& v) {
  if (!j.is_array() || j.size() != 3) {
    throw Error(ErrorCode::kCorruptLog, "axis vector must be a 3-element array");
  }
  v.c = j[0].get<double>();
  v.a = j[1].get<double>();
  v.p = j[2].get<double>();
}

inline void to_json(json& j, const GateConfig& g) {
  j = json{{"eps_energy", g.eps_energy},
           {"energy_relative_to_r0", g.energy_relative_to_r0},
           {"eps_dist", g.eps_dist},
           {"tau_align", g.tau_align},
           {"fail_deterioration", g.fail_deterioration}};
}

inline void from_json(const json& j, GateConfig& g) {
  g = GateConfig{};
  g.eps_energy = j.value("eps_energy", g.eps_energy);
  g.energy_relative_to_r0 = j.value("energy_relative_to_r0", g.energy_relative_to_r0);
  g.eps_dist = j.value("eps_dist", g.eps_dist);
  g.tau_align = j.value("tau_align", g.tau_align);
  g.fail_deterioration = j.value("fail_deterioration", g.fail_deterioration);
  g.validate();
}

namespace rubric {

inline void to_json(json& j, const IedrIndicator& ind) {
  j = json{{"id", std::string(to_string(ind.id))},
           {"level", ind.level},
           {"evidence", ind.evidence},
           {"reasoning", ind.reasoning}};
}

inline void from_json(const json& j, IedrIndicator& ind) {
  if (!j.is_object() || !j.contains("id") || !j.at("id").is_string()) {
    throw Error(ErrorCode::kMalformedJudgeOutput, "indicator record needs a string 'id'");
  }
  ind.id = parse_indicator(j.at("id").get<std::string>());
  ind.level = detail::strict_int(j, "level", ErrorCode::kInvalidLevel);
  ind.evidence = detail::text_field(j, "evidence");
  ind.reasoning = detail::text_field(j, "reasoning");
}

inline void to_json(json& j, const IedrAssessment& a) {
  j = json{{"indicators", a.indicators}};
}

inline void from_json(const json& j, IedrAssessment& a) {
  if (!j.is_object() || !j.contains("indicators") || !j.at("indicators").is_array()) {
    throw Error(ErrorCode::kMalformedJudgeOutput, "assessment needs an 'indicators' array");
  }
  a.indicators.clear();
  for (const auto& item : j.at("indicators")) a.indicators.push_back(item.get<IedrIndicator>());
}

inline void to_json(json& j, const MdepChannelRating& r) {
  j = json{{"axis", std::string(axis_letter(r.axis))},
           {"channel", std::string(to_string(r.channel))},
           {"level", r.level},
           {"evidence", r.evidence},
           {"reasoning", r.reasoning}};
}

inline void from_json(const json& j, MdepChannelRating& r) {
  if (!j.is_object() || !j.contains("axis") || !j.at("axis").is_string() ||
      !j.contains("channel") || !j.at("channel").is_string()) {
    throw Error(ErrorCode::kMalformedJudgeOutput, "channel record needs 'axis' and 'channel'");
  }
  const auto axis = j.at("axis").get<std::string>();
  if (axis != "C" && axis != "A" && axis != "P") {
    throw Error(ErrorCode::kMalformedJudgeOutput, "unknown axis '" + axis + "'");
  }
  r.axis = parse_axis(axis);
  r.channel = parse_channel(j.at("channel").get<std::string>());
  r.level = detail::strict_int(j, "level", ErrorCode::kInvalidLevel);
  r.evidence = detail::text_field(j, "evidence");
  r.reasoning = detail::text_field(j, "reasoning");
}

inline void to_json(json& j, const MdepWindowRating& w) {
  j = json{{"window_index", w.window_index}, {"channels", w.channels}};
}

inline void from_json(const json& j, MdepWindowRating& w) {
  if (!j.is_object() || !j.contains("channels") || !j.at("channels").is_array()) {
    throw Error(ErrorCode::kMalformedJudgeOutput, "window needs a 'channels' array");
  }
  w.window_index = j.contains("window_index")
                       ? detail::strict_int(j, "window_index", ErrorCode::kMalformedJudgeOutput)
                       : 1;
  w.channels.clear();
  for (const auto& item : j.at("channels")) w.channels.push_back(item.get<MdepChannelRating>());
}

}  // namespace rubric

namespace metrics {

inline void to_json(json& j, const MetricBundle& m) {
  j = json{{"status", std::string(to_string(m.status))},
           {"rdi_raw", m.rdi_raw},
           {"e_total", m.e_total},
           {"e_surplus", m.e_surplus},
           {"s_net", m.s_net},
           {"rho", m.rho},
           {"s_proj", m.s_proj},
           {"tortuosity_raw", m.tortuosity_raw},
           {"mean_cos", m.mean_cos},
           {"r_pos", m.r_pos},
           {"r_pen", m.r_pen}};
}

inline void from_json(const json& j, MetricBundle& m) {
  m.status = parse_termination(j.at("status").get<std::string>());
  m.rdi_raw = j.at("rdi_raw").get<double>();
  m.e_total = j.at("e_total").get<double>();
  m.e_surplus = j.at("e_surplus").get<double>();
  m.s_net = j.at("s_net").get<double>();
  m.rho = j.at("rho").get<double>();
  m.s_proj = j.at("s_proj").get<double>();
  m.tortuosity_raw = j.at("tortuosity_raw").get<double>();
  m.mean_cos = j.at("mean_cos").get<double>();
  m.r_pos = j.at("r_pos").get<double>();
  m.r_pen = j.at("r_pen").get<double>();
}

inline void to_json(json& j, const IndexBundle& b) {
  j = json{{"idx_rdi", b.idx_rdi},     {"idx_etot", b.idx_etot},   {"idx_snet", b.idx_snet},
           {"idx_rho", b.idx_rho},     {"idx_sproj", b.idx_sproj}, {"idx_tau", b.idx_tau},
           {"idx_rpos", b.idx_rpos},   {"idx_align", b.idx_align}, {"idx_pen", b.idx_pen},
           {"outcome", b.outcome},     {"efficiency", b.efficiency},
           {"stability", b.stability}, {"epm_index", b.epm_index}};
}

inline void from_json(const json& j, IndexBundle& b) {
  b.idx_rdi = j.at("idx_rdi").get<double>();
  b.idx_etot = j.at("idx_etot").get<double>();
  b.idx_snet = j.at("idx_snet").get<double>();
  b.idx_rho = j.at("idx_rho").get<double>();
  b.idx_sproj = j.at("idx_sproj").get<double>();
  b.idx_tau = j.at("idx_tau").get<double>();
  b.idx_rpos = j.at("idx_rpos").get<double>();
  b.idx_align = j.at("idx_align").get<double>();
  b.idx_pen = j.at("idx_pen").get<double>();
  b.outcome = j.at("outcome").get<double>();
  b.efficiency = j.at("efficiency").get<double>();
  b.stability = j.at("stability").get<double>();
  b.epm_index = j.at("epm_index").get<double>();
}

}  // namespace metrics

}  // namespace empa

#endif  // EMPA_JSON_HPP_
