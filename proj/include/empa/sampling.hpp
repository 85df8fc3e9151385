#ifndef EMPA_SAMPLING_HPP_
#define EMPA_SAMPLING_HPP_

// Seeded stratified sampling over (axis, domain) with optional mechanism
// minima and a minimum defensive-persona share.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "empa/error.hpp"
#include "empa/json.hpp"
#include "empa/scenario.hpp"

namespace empa::scenario {

struct SamplingSpec {
  std::size_t total = 30;
  // Exact counts per mechanism axis; empty means unconstrained.
  std::map<AxisId, std::size_t> per_axis;
  // Exact counts per domain; empty means unconstrained.
  std::map<std::string, std::size_t> per_domain;
  std::map<MechanismLabel, std::size_t> min_mechanism;
  double min_defensive_fraction = 0.0;
  std::uint64_t seed = 0;

  std::size_t min_defensive() const {
    return static_cast<std::size_t>(std::ceil(min_defensive_fraction * static_cast<double>(total) - 1e-9));
  }
};

inline SamplingSpec benchmark_sampling_spec(std::uint64_t seed = 0) {
  SamplingSpec s;
  s.total = 30;
  for (AxisId a : kAxes) s.per_axis[a] = 10;
  for (const auto& d : default_domains()) s.per_domain[d] = 5;
  s.min_defensive_fraction = 0.5;
  s.seed = seed;
  return s;
}

inline void to_json(json& j, const SamplingSpec& s) {
  json axes = json::object();
  for (const auto& [a, n] : s.per_axis) axes[std::string(axis_letter(a))] = n;
  json mech = json::object();
  for (const auto& [m, n] : s.min_mechanism) mech[to_string(m)] = n;
  j = json{{"total", s.total},
           {"per_axis", axes},
           {"per_domain", s.per_domain},
           {"min_mechanism", mech},
           {"min_defensive_fraction", s.min_defensive_fraction},
           {"seed", s.seed}};
}

inline void from_json(const json& j, SamplingSpec& s) {
  s = SamplingSpec{};
  s.total = j.value("total", s.total);
  const json per_axis = j.value("per_axis", json::object());
  for (const auto& [k, v] : per_axis.items()) {
    s.per_axis[parse_axis(k)] = v.get<std::size_t>();
  }
  const json per_domain = j.value("per_domain", json::object());
  for (const auto& [k, v] : per_domain.items()) {
    s.per_domain[k] = v.get<std::size_t>();
  }
  const json min_mechanism = j.value("min_mechanism", json::object());
  for (const auto& [k, v] : min_mechanism.items()) {
    s.min_mechanism[parse_mechanism(k)] = v.get<std::size_t>();
  }
  s.min_defensive_fraction = j.value("min_defensive_fraction", 0.0);
  s.seed = j.value("seed", std::uint64_t{0});
}

namespace detail {

// Portable Fisher-Yates: the standard distributions differ across libraries.
inline void seeded_shuffle(std::vector<std::size_t>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[rng() % i]);
  }
}

// Max flow on a dense capacity matrix (augmenting paths by BFS).
inline long max_flow(std::vector<std::vector<long>>& cap, std::size_t s, std::size_t t) {
  const std::size_t n = cap.size();
  long flow = 0;
  while (true) {
    std::vector<long> parent(n, -1);
    parent[s] = static_cast<long>(s);
    std::vector<std::size_t> queue{s};
    for (std::size_t qi = 0; qi < queue.size() && parent[t] < 0; ++qi) {
      const auto u = queue[qi];
      for (std::size_t v = 0; v < n; ++v) {
        if (parent[v] < 0 && cap[u][v] > 0) {
          parent[v] = static_cast<long>(u);
          queue.push_back(v);
        }
      }
    }
    if (parent[t] < 0) return flow;
    long aug = std::numeric_limits<long>::max();
    for (auto v = t; v != s; v = static_cast<std::size_t>(parent[v])) {
      aug = std::min(aug, cap[static_cast<std::size_t>(parent[v])][v]);
    }
    for (auto v = t; v != s; v = static_cast<std::size_t>(parent[v])) {
      const auto u = static_cast<std::size_t>(parent[v]);
      cap[u][v] -= aug;
      cap[v][u] += aug;
    }
    flow += aug;
  }
}

}  // namespace detail

// Returns the selected scenarios in corpus order. Throws InfeasibleStrata
// listing every unmet stratum.
inline std::vector<Scenario> stratified_sample(const std::vector<Scenario>& corpus,
                                               const SamplingSpec& spec) {
  std::vector<std::string> deficits;
  auto need = [&](const std::string& stratum, std::size_t want, std::size_t have) {
    if (have < want) {
      deficits.push_back(stratum + " needs " + std::to_string(want) + ", has " +
                         std::to_string(have));
    }
  };

  if (corpus.size() < spec.total) need("total", spec.total, corpus.size());
  std::size_t axis_sum = 0;
  for (const auto& [axis, want] : spec.per_axis) {
    axis_sum += want;
    need("axis " + std::string(axis_letter(axis)), want,
         std::count_if(corpus.begin(), corpus.end(),
                       [&](const Scenario& s) { return s.mechanism.axis == axis; }));
  }
  std::size_t domain_sum = 0;
  for (const auto& [domain, want] : spec.per_domain) {
    domain_sum += want;
    need("domain " + domain, want,
         std::count_if(corpus.begin(), corpus.end(),
                       [&](const Scenario& s) { return s.domain_label == domain; }));
  }
  for (const auto& [mech, want] : spec.min_mechanism) {
    need(to_string(mech), want, std::count_if(corpus.begin(), corpus.end(), [&](const Scenario& s) {
           return s.mechanism == mech;
         }));
  }
  const std::size_t defensive_avail = std::count_if(corpus.begin(), corpus.end(), [](const Scenario& s) {
    return s.persona_type == PersonaType::kDefensive;
  });
  need("Defensive", spec.min_defensive(), defensive_avail);
  if (!spec.per_axis.empty() && axis_sum != spec.total) {
    throw Error(ErrorCode::kConfigError, "per_axis counts do not sum to total");
  }
  if (!spec.per_domain.empty() && domain_sum != spec.total) {
    throw Error(ErrorCode::kConfigError, "per_domain counts do not sum to total");
  }
  auto fail = [&] {
    std::string msg;
    for (const auto& d : deficits) msg += (msg.empty() ? "" : "; ") + d;
    throw Error(ErrorCode::kInfeasibleStrata, msg);
  };
  if (!deficits.empty()) fail();

  // Row and column keys; unconstrained dimensions collapse to one group.
  std::vector<std::string> rows;
  std::vector<std::size_t> row_cap;
  if (spec.per_axis.empty()) {
    rows = {"*"};
    row_cap = {spec.total};
  } else {
    for (const auto& [axis, want] : spec.per_axis) {
      rows.emplace_back(axis_letter(axis));
      row_cap.push_back(want);
    }
  }
  std::vector<std::string> cols;
  std::vector<std::size_t> col_cap;
  if (spec.per_domain.empty()) {
    cols = {"*"};
    col_cap = {spec.total};
  } else {
    for (const auto& [domain, want] : spec.per_domain) {
      cols.push_back(domain);
      col_cap.push_back(want);
    }
  }
  auto row_of = [&](const Scenario& s) -> long {
    if (spec.per_axis.empty()) return 0;
    const auto it = std::find(rows.begin(), rows.end(), std::string(axis_letter(s.mechanism.axis)));
    return it == rows.end() ? -1 : it - rows.begin();
  };
  auto col_of = [&](const Scenario& s) -> long {
    if (spec.per_domain.empty()) return 0;
    const auto it = std::find(cols.begin(), cols.end(), s.domain_label);
    return it == cols.end() ? -1 : it - cols.begin();
  };

  std::mt19937_64 rng(spec.seed);
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  detail::seeded_shuffle(order, rng);

  // cells[r][c] holds candidate indices in shuffled order.
  std::vector<std::vector<std::vector<std::size_t>>> cells(
      rows.size(), std::vector<std::vector<std::size_t>>(cols.size()));
  for (auto i : order) {
    const auto r = row_of(corpus[i]);
    const auto c = col_of(corpus[i]);
    if (r >= 0 && c >= 0) cells[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)].push_back(i);
  }

  const std::size_t n = 2 + rows.size() + cols.size();
  const std::size_t src = 0, sink = n - 1;
  std::vector<std::vector<long>> cap(n, std::vector<long>(n, 0));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    cap[src][1 + r] = static_cast<long>(row_cap[r]);
    for (std::size_t c = 0; c < cols.size(); ++c) {
      cap[1 + r][1 + rows.size() + c] = static_cast<long>(cells[r][c].size());
    }
  }
  for (std::size_t c = 0; c < cols.size(); ++c) {
    cap[1 + rows.size() + c][sink] = static_cast<long>(col_cap[c]);
  }
  const auto initial = cap;
  if (detail::max_flow(cap, src, sink) < static_cast<long>(spec.total)) {
    deficits.push_back("no axis x domain allocation meets all counts");
    fail();
  }

  // Quotas per cell, then the first `quota` candidates of each cell.
  std::vector<std::vector<std::size_t>> quota(rows.size(), std::vector<std::size_t>(cols.size()));
  std::vector<char> chosen(corpus.size(), 0);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const auto u = 1 + r, v = 1 + rows.size() + c;
      quota[r][c] = static_cast<std::size_t>(initial[u][v] - cap[u][v]);
      for (std::size_t k = 0; k < quota[r][c]; ++k) chosen[cells[r][c][k]] = 1;
    }
  }

  // Swap repair inside cells for mechanism minima and defensive share.
  auto mech_count = [&](const MechanismLabel& m) {
    std::size_t k = 0;
    for (std::size_t i = 0; i < corpus.size(); ++i) k += chosen[i] && corpus[i].mechanism == m;
    return k;
  };
  auto defensive_count = [&] {
    std::size_t k = 0;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      k += chosen[i] && corpus[i].persona_type == PersonaType::kDefensive;
    }
    return k;
  };
  // Score of how far the selection is from the soft constraints.
  auto shortfall = [&] {
    std::size_t s = 0;
    for (const auto& [m, want] : spec.min_mechanism) {
      const auto have = mech_count(m);
      if (have < want) s += want - have;
    }
    const auto d = defensive_count();
    if (d < spec.min_defensive()) s += spec.min_defensive() - d;
    return s;
  };
  for (std::size_t current = shortfall(); current > 0;) {
    bool improved = false;
    for (std::size_t r = 0; r < rows.size() && !improved; ++r) {
      for (std::size_t c = 0; c < cols.size() && !improved; ++c) {
        for (auto out : cells[r][c]) {
          if (!chosen[out]) continue;
          for (auto in : cells[r][c]) {
            if (chosen[in]) continue;
            chosen[out] = 0;
            chosen[in] = 1;
            const auto next = shortfall();
            if (next < current) {
              current = next;
              improved = true;
              break;
            }
            chosen[in] = 0;
            chosen[out] = 1;
          }
          if (improved) break;
        }
      }
    }
    if (!improved) {
      for (const auto& [m, want] : spec.min_mechanism) {
        need(to_string(m) + " (after allocation)", want, mech_count(m));
      }
      need("Defensive (after allocation)", spec.min_defensive(), defensive_count());
      fail();
    }
  }

  std::vector<Scenario> out;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (chosen[i]) out.push_back(corpus[i]);
  }
  return out;
}

}  // namespace empa::scenario

#endif  // EMPA_SAMPLING_HPP_
