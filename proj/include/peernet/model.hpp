#pragma once

// Structural primitives of the random-consideration choice model.
//
// Each agent a has a menu {0,...,Y} (0 is the default), a consideration
// reference group nc[a], and a preference reference group nr[a]. Consideration
// of a non-default alternative v is an independent Bernoulli with probability
// Q_a(v|n) where n is the number of consideration peers currently picking v;
// the default is always considered. Conditional on the realized consideration
// set C, the agent picks v in C with probability R_a(v|counts, C) where counts
// collects, per non-default alternative of C, the number of preference peers
// currently picking it.
//
// Menus and consideration sets are encoded as bitmasks over alternatives
// (bit v set <=> v in the set); every valid set contains bit 0.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "peernet/common.hpp"

namespace peernet {

struct NetworkStructure {
  std::vector<std::vector<int>> nc;  // consideration peers, sorted ascending
  std::vector<std::vector<int>> nr;  // preference peers, sorted ascending

  int n_agents() const { return static_cast<int>(nc.size()); }

  static std::vector<int> set_minus(const std::vector<int>& x, const std::vector<int>& y) {
    std::vector<int> out;
    std::set_difference(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(out));
    return out;
  }
  static std::vector<int> set_and(const std::vector<int>& x, const std::vector<int>& y) {
    std::vector<int> out;
    std::set_intersection(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(out));
    return out;
  }
  static std::vector<int> set_or(const std::vector<int>& x, const std::vector<int>& y) {
    std::vector<int> out;
    std::set_union(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(out));
    return out;
  }

  std::vector<int> peers(int a) const { return set_or(nc.at(a), nr.at(a)); }
  std::vector<int> ncr(int a) const { return set_and(nc.at(a), nr.at(a)); }
  std::vector<int> consideration_only(int a) const { return set_minus(nc.at(a), nr.at(a)); }
  std::vector<int> preference_only(int a) const { return set_minus(nr.at(a), nc.at(a)); }
};

// Choice rule rows for one agent, keyed by menu mask then by the vector of
// preference-peer counts for the menu's non-default alternatives (ascending).
// Each row is a distribution over the menu's alternatives in ascending order.
// Rows are stored only for count vectors a caller supplies; looking up a
// missing row is an error rather than an implicit zero.
struct ChoiceRule {
  std::map<std::uint32_t, std::map<std::vector<int>, std::vector<double>>> rows;
};

struct ModelSpec {
  int menu_max = 0;  // Y; alternatives are 0..Y
  NetworkStructure net;
  std::vector<double> lambda;                      // Poisson alarm rates, per agent
  std::vector<std::vector<std::vector<double>>> q;  // [agent][v-1][n], n = 0..|nc[a]|
  std::vector<ChoiceRule> r;                        // [agent]

  int n_agents() const { return net.n_agents(); }
  std::uint32_t full_menu_mask() const { return (std::uint32_t{1} << (menu_max + 1)) - 1; }
  std::int64_t n_configs() const { return config_count(n_agents(), menu_max); }
};

// Counts of peers picking each non-default alternative, separately for the
// consideration and preference reference groups. Index v-1 holds the count
// for alternative v.
struct PeerCounts {
  std::vector<int> nc_count;
  std::vector<int> nr_count;
};

inline PeerCounts peer_counts(const ModelSpec& m, int a, const Config& y) {
  require(a >= 0 && a < m.n_agents(), "peer_counts: agent out of range");
  require(static_cast<int>(y.size()) == m.n_agents(), "peer_counts: configuration size mismatch");
  PeerCounts pc;
  pc.nc_count.assign(m.menu_max, 0);
  pc.nr_count.assign(m.menu_max, 0);
  for (int p : m.net.nc[a])
    if (y[p] > 0) ++pc.nc_count[y[p] - 1];
  for (int p : m.net.nr[a])
    if (y[p] > 0) ++pc.nr_count[y[p] - 1];
  return pc;
}

inline double q_value(const ModelSpec& m, int a, int v, int n) {
  require(v >= 1 && v <= m.menu_max, "q_value: alternative out of range");
  const auto& tab = m.q.at(a).at(v - 1);
  require(n >= 0 && n < static_cast<int>(tab.size()),
          "q_value: count outside the stored support");
  return tab[n];
}

inline std::vector<int> menu_alternatives(std::uint32_t menu_mask, int menu_max) {
  std::vector<int> alts;
  for (int v = 0; v <= menu_max; ++v)
    if (menu_mask & (std::uint32_t{1} << v)) alts.push_back(v);
  return alts;
}

// Count-vector key for a menu: preference counts of its non-default
// alternatives in ascending order.
inline std::vector<int> counts_key(std::uint32_t menu_mask, int menu_max,
                                   const std::vector<int>& nr_count) {
  std::vector<int> key;
  for (int v = 1; v <= menu_max; ++v)
    if (menu_mask & (std::uint32_t{1} << v)) key.push_back(nr_count[v - 1]);
  return key;
}

// R_a(v | counts, C) looked up from the stored rows. v outside C has pick
// probability zero by construction.
inline double r_value(const ModelSpec& m, int a, int v, std::uint32_t menu_mask,
                      const std::vector<int>& nr_count) {
  require(menu_mask & 1u, "r_value: menu must contain the default");
  if (!(menu_mask & (std::uint32_t{1} << v))) return 0.0;
  const auto& rule = m.r.at(a);
  auto it = rule.rows.find(menu_mask);
  require(it != rule.rows.end(), "r_value: no choice-rule rows for this menu");
  auto key = counts_key(menu_mask, m.menu_max, nr_count);
  auto jt = it->second.find(key);
  require(jt != it->second.end(), "r_value: choice-rule row missing for this count vector");
  const auto alts = menu_alternatives(menu_mask, m.menu_max);
  for (std::size_t i = 0; i < alts.size(); ++i)
    if (alts[i] == v) return jt->second.at(i);
  return 0.0;
}

// Probability that the realized consideration set equals exactly the
// alternatives of set_mask, given the consideration-peer counts. Sets missing
// the default have probability zero.
inline double consideration_set_prob(const ModelSpec& m, int a, std::uint32_t set_mask,
                                     const std::vector<int>& nc_count) {
  if (!(set_mask & 1u)) return 0.0;
  double p = 1.0;
  for (int v = 1; v <= m.menu_max; ++v) {
    const double qv = q_value(m, a, v, nc_count[v - 1]);
    p *= (set_mask & (std::uint32_t{1} << v)) ? qv : (1.0 - qv);
  }
  return p;
}

inline double consideration_set_prob(const ModelSpec& m, int a, std::uint32_t set_mask,
                                     const PeerCounts& pc) {
  return consideration_set_prob(m, a, set_mask, pc.nc_count);
}

// Conditional choice probability over a restricted menu as a function of the
// peer-count vectors alone: the consideration draw runs over the menu's
// non-default alternatives only, and the choice rule row for each realized set
// is applied. menu_mask must contain the default and v; zero-probability
// consideration sets are skipped without a row lookup.
inline double restricted_choice_prob(const ModelSpec& m, int a, int v, const PeerCounts& pc,
                                     std::uint32_t menu_mask) {
  require(menu_mask & 1u, "restricted_choice_prob: menu must contain the default");
  require(v >= 0 && v <= m.menu_max, "restricted_choice_prob: alternative out of range");
  require(menu_mask & (std::uint32_t{1} << v),
          "restricted_choice_prob: alternative not in the menu");
  std::vector<int> opts;
  for (int w = 1; w <= m.menu_max; ++w)
    if (menu_mask & (std::uint32_t{1} << w)) opts.push_back(w);
  const int k = static_cast<int>(opts.size());
  double total = 0.0;
  for (std::uint32_t bits = 0; bits < (std::uint32_t{1} << k); ++bits) {
    std::uint32_t set_mask = 1u;
    double w = 1.0;
    for (int i = 0; i < k; ++i) {
      const double qv = q_value(m, a, opts[i], pc.nc_count[opts[i] - 1]);
      if (bits & (std::uint32_t{1} << i)) {
        set_mask |= std::uint32_t{1} << opts[i];
        w *= qv;
      } else {
        w *= 1.0 - qv;
      }
    }
    if (w == 0.0) continue;
    total += w * r_value(m, a, v, set_mask, pc.nr_count);
  }
  return total;
}

inline double restricted_choice_prob(const ModelSpec& m, int a, int v, const Config& y,
                                     std::uint32_t menu_mask) {
  return restricted_choice_prob(m, a, v, peer_counts(m, a, y), menu_mask);
}

// Full-menu conditional choice probability by direct enumeration of
// consideration sets.
inline double choice_prob(const ModelSpec& m, int a, int v, const Config& y) {
  return restricted_choice_prob(m, a, v, y, m.full_menu_mask());
}

inline double choice_prob(const ModelSpec& m, int a, int v, const PeerCounts& pc) {
  return restricted_choice_prob(m, a, v, pc, m.full_menu_mask());
}

// Whole CCP row P_a(.|y) in one enumeration pass over consideration sets.
inline std::vector<double> choice_prob_row(const ModelSpec& m, int a, const PeerCounts& pc) {
  std::vector<double> row(m.menu_max + 1, 0.0);
  const int Y = m.menu_max;
  for (std::uint32_t bits = 0; bits < (std::uint32_t{1} << Y); ++bits) {
    const std::uint32_t set_mask = (bits << 1) | 1u;
    double w = 1.0;
    for (int v = 1; v <= Y; ++v) {
      const double qv = q_value(m, a, v, pc.nc_count[v - 1]);
      w *= (set_mask & (std::uint32_t{1} << v)) ? qv : (1.0 - qv);
    }
    if (w == 0.0) continue;
    for (int v = 0; v <= Y; ++v)
      if (set_mask & (std::uint32_t{1} << v)) row[v] += w * r_value(m, a, v, set_mask, pc.nr_count);
  }
  return row;
}

inline std::vector<double> choice_prob_row(const ModelSpec& m, int a, const Config& y) {
  return choice_prob_row(m, a, peer_counts(m, a, y));
}

// Same quantity for v != 0 computed through the factorization that pulls the
// consideration of v out front: P_a(v|y) = Q_a(v|n_v) * sum over sets C of the
// remaining alternatives of R_a(v | ., C + {v}) * prob(C realized among them).
inline double choice_prob_factorized(const ModelSpec& m, int a, int v, const Config& y) {
  require(v >= 0 && v <= m.menu_max, "choice_prob_factorized: alternative out of range");
  if (v == 0) return choice_prob(m, a, 0, y);
  const PeerCounts pc = peer_counts(m, a, y);
  std::vector<int> others;
  for (int w = 1; w <= m.menu_max; ++w)
    if (w != v) others.push_back(w);
  const int k = static_cast<int>(others.size());
  double inner = 0.0;
  for (std::uint32_t bits = 0; bits < (std::uint32_t{1} << k); ++bits) {
    std::uint32_t set_mask = 1u | (std::uint32_t{1} << v);
    double w = 1.0;
    for (int i = 0; i < k; ++i) {
      const double qw = q_value(m, a, others[i], pc.nc_count[others[i] - 1]);
      if (bits & (std::uint32_t{1} << i)) {
        set_mask |= std::uint32_t{1} << others[i];
        w *= qw;
      } else {
        w *= 1.0 - qw;
      }
    }
    if (w == 0.0) continue;
    inner += w * r_value(m, a, v, set_mask, pc.nr_count);
  }
  return q_value(m, a, v, pc.nc_count[v - 1]) * inner;
}

// Structural sanity of a model spec: shapes, probability ranges, row sums.
// Semantic assumptions (positivity margins, ratio conditions, network
// exclusion) live in validate.hpp.
inline void check_model_structure(const ModelSpec& m) {
  const int A = m.n_agents();
  require(A >= 1, "model: no agents");
  require(m.menu_max >= 1, "model: menu needs a non-default alternative");
  require(static_cast<int>(m.net.nr.size()) == A, "model: nr size mismatch");
  require(static_cast<int>(m.lambda.size()) == A, "model: lambda size mismatch");
  require(static_cast<int>(m.q.size()) == A, "model: q size mismatch");
  require(static_cast<int>(m.r.size()) == A, "model: r size mismatch");
  for (int a = 0; a < A; ++a) {
    require(m.lambda[a] > 0.0, "model: lambda must be positive");
    for (const auto& group : {m.net.nc[a], m.net.nr[a]}) {
      int prev = -1;
      for (int p : group) {
        require(p >= 0 && p < A && p != a, "model: peer index out of range or self");
        require(p > prev, "model: peer lists must be sorted strictly ascending");
        prev = p;
      }
    }
    require(static_cast<int>(m.q[a].size()) == m.menu_max, "model: q alternative count mismatch");
    for (int v = 1; v <= m.menu_max; ++v) {
      const auto& tab = m.q[a][v - 1];
      require(static_cast<int>(tab.size()) == static_cast<int>(m.net.nc[a].size()) + 1,
              "model: q support must cover counts 0..|nc|");
      for (double qv : tab)
        require(qv >= 0.0 && qv <= 1.0 && std::isfinite(qv), "model: q outside [0,1]");
    }
    for (const auto& [mask, by_counts] : m.r[a].rows) {
      require(mask & 1u, "model: choice-rule menu missing the default");
      require(mask <= m.full_menu_mask(), "model: choice-rule menu outside the full menu");
      const auto alts = menu_alternatives(mask, m.menu_max);
      const int n_nondefault = static_cast<int>(alts.size()) - 1;
      for (const auto& [key, row] : by_counts) {
        require(static_cast<int>(key.size()) == n_nondefault,
                "model: count-vector length mismatch");
        int total = 0;
        for (int c : key) {
          require(c >= 0, "model: negative preference count");
          total += c;
        }
        require(total <= static_cast<int>(m.net.nr[a].size()),
                "model: count vector exceeds the preference group size");
        require(row.size() == alts.size(), "model: choice-rule row length mismatch");
        double s = 0.0;
        for (double p : row) {
          require(p >= 0.0 && p <= 1.0 && std::isfinite(p), "model: choice probability outside [0,1]");
          s += p;
        }
        require(std::abs(s - 1.0) <= 1e-12, "model: choice-rule row does not sum to 1");
      }
    }
  }
}

}  // namespace peernet
