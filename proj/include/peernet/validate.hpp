#pragma once

// Assumption validator.
//
// Checks the maintained assumptions of the identification results clause by
// clause and reports machine-readable pass/fail verdicts with witnesses:
//   A2(i)   consideration probabilities strictly positive
//   A2(iii) Q(v|1)/Q(v|0) differs from 1 and from Q(v|2)/Q(v|1)
//   A3(i)   every alternative is picked with positive probability from some
//           consideration set that can realize
//   A3(iii) the preference-peer effect R(v|e_v,C) - R(v|0,C) is nonzero with
//           a set-independent sign
//   A4      an agent with joint (consideration-and-preference) peers also has
//           a peer in exactly one of the two groups
//   A5      regularity of the count-indexed log CCP: the own-alternative
//           double increment and three cross double differences are nonzero
//           somewhere on the reachable count support
// A2(ii)/A3(ii) (count dependence only) hold by construction of the tables.
// Ratio behavior of Q at counts beyond the origin is reported informationally.

#include <cmath>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "peernet/model.hpp"

namespace peernet {

struct ClauseReport {
  std::string clause;
  int agent = -1;
  // "pass", "fail", or "not_applicable" when the clause has nothing to bind on.
  std::string status;
  std::string detail;
};

struct ValidationReport {
  std::vector<ClauseReport> clauses;
  std::vector<std::string> notes;

  bool all_pass() const {
    for (const auto& c : clauses)
      if (c.status == "fail") return false;
    return true;
  }
};

namespace detail {

// All count pairs (nr_count, nc_count) reachable by assigning each peer of
// agent a to some alternative. Peers contribute to nr, nc, or both depending
// on their group membership.
inline std::vector<std::pair<std::vector<int>, std::vector<int>>> reachable_count_pairs(
    const ModelSpec& m, int a) {
  const int Y = m.menu_max;
  const int np = static_cast<int>(m.net.preference_only(a).size());
  const int nc = static_cast<int>(m.net.consideration_only(a).size());
  const int nb = static_cast<int>(m.net.ncr(a).size());

  // Compositions of n over alternatives 1..Y (rest of the class sits at 0).
  auto compositions = [Y](int n) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur(Y, 0);
    auto rec = [&](auto&& self, int v, int left) -> void {
      if (v == Y) {
        out.push_back(cur);
        return;
      }
      for (int k = 0; k <= left; ++k) {
        cur[v] = k;
        self(self, v + 1, left - k);
      }
      cur[v] = 0;
    };
    rec(rec, 0, n);
    return out;
  };

  std::set<std::pair<std::vector<int>, std::vector<int>>> seen;
  for (const auto& cp : compositions(np))
    for (const auto& cc : compositions(nc))
      for (const auto& cb : compositions(nb)) {
        std::vector<int> nr_count(Y, 0), nc_count(Y, 0);
        for (int v = 0; v < Y; ++v) {
          nr_count[v] = cp[v] + cb[v];
          nc_count[v] = cc[v] + cb[v];
        }
        seen.emplace(std::move(nr_count), std::move(nc_count));
      }
  return {seen.begin(), seen.end()};
}

inline std::string join_counts(const std::vector<int>& nr, const std::vector<int>& nc) {
  std::ostringstream os;
  os << "nr=(";
  for (std::size_t i = 0; i < nr.size(); ++i) os << (i ? "," : "") << nr[i];
  os << ") nc=(";
  for (std::size_t i = 0; i < nc.size(); ++i) os << (i ? "," : "") << nc[i];
  os << ")";
  return os.str();
}

}  // namespace detail

inline ValidationReport validate_assumptions(const ModelSpec& m, double tol = 1e-9) {
  check_model_structure(m);
  ValidationReport rep;
  const int A = m.n_agents();
  const int Y = m.menu_max;

  auto add = [&rep](const std::string& clause, int agent, bool applicable, bool ok,
                    const std::string& detail) {
    rep.clauses.push_back({clause, agent,
                           applicable ? (ok ? "pass" : "fail") : "not_applicable", detail});
  };

  for (int a = 0; a < A; ++a) {
    const int n_nc = static_cast<int>(m.net.nc[a].size());
    const int n_nr = static_cast<int>(m.net.nr[a].size());

    // A2(i): strict positivity of every stored consideration probability.
    {
      bool ok = true;
      std::string detail;
      for (int v = 1; v <= Y && ok; ++v)
        for (int n = 0; n <= n_nc && ok; ++n)
          if (q_value(m, a, v, n) <= 0.0) {
            ok = false;
            detail = "Q(" + std::to_string(v) + "|" + std::to_string(n) + ") <= 0";
          }
      add("A2(i)", a, true, ok, detail);
    }

    // A2(iii): at the origin, the first consideration ratio differs from 1,
    // and from the second ratio when the group has two members.
    {
      bool applicable = n_nc >= 1;
      bool ok = true;
      std::string detail;
      for (int v = 1; v <= Y && applicable && ok; ++v) {
        const double r0 = q_value(m, a, v, 1) / q_value(m, a, v, 0);
        if (std::abs(std::log(r0)) <= tol) {
          ok = false;
          detail = "Q(" + std::to_string(v) + "|1)/Q(" + std::to_string(v) + "|0) = 1";
        } else if (n_nc >= 2) {
          const double r1 = q_value(m, a, v, 2) / q_value(m, a, v, 1);
          if (std::abs(std::log(r0) - std::log(r1)) <= tol) {
            ok = false;
            detail = "first and second consideration ratios coincide for v=" +
                     std::to_string(v);
          }
        }
      }
      add("A2(iii)", a, applicable, ok, detail);
      for (int v = 1; v <= Y && applicable; ++v)
        for (int n = 1; n + 1 <= n_nc; ++n) {
          const double ra = q_value(m, a, v, n) / q_value(m, a, v, n - 1);
          const double rb = q_value(m, a, v, n + 1) / q_value(m, a, v, n);
          if (std::abs(std::log(ra) - std::log(rb)) <= tol)
            rep.notes.push_back("agent " + std::to_string(a) + ": consideration ratios at counts " +
                                std::to_string(n - 1) + ".." + std::to_string(n + 1) +
                                " coincide for v=" + std::to_string(v) +
                                " (informational; the origin condition is what is required)");
        }
    }

    const auto support = detail::reachable_count_pairs(m, a);
    std::set<std::pair<std::vector<int>, std::vector<int>>> support_set(support.begin(),
                                                                        support.end());
    auto reachable = [&support_set](const std::vector<int>& nr, const std::vector<int>& nc) {
      return support_set.count({nr, nc}) > 0;
    };
    auto log_ccp = [&m, a](int v, const std::vector<int>& nr, const std::vector<int>& nc) {
      PeerCounts pc{nc, nr};
      return std::log(choice_prob(m, a, v, pc));
    };

    // A3(i): each alternative has a realizable consideration set from which it
    // is picked with positive probability, at every reachable count pair.
    {
      bool ok = true;
      std::string detail;
      for (int v = 1; v <= Y && ok; ++v)
        for (const auto& [nr_c, nc_c] : support) {
          bool found = false;
          for (std::uint32_t bits = 0; bits < (std::uint32_t{1} << Y) && !found; ++bits) {
            const std::uint32_t set_mask = (bits << 1) | 1u;
            if (!(set_mask & (std::uint32_t{1} << v))) continue;
            if (consideration_set_prob(m, a, set_mask, nc_c) <= 0.0) continue;
            if (r_value(m, a, v, set_mask, nr_c) > 0.0) found = true;
          }
          if (!found) {
            ok = false;
            detail = "no realizable set picks v=" + std::to_string(v) + " at " +
                     detail::join_counts(nr_c, nc_c);
            break;
          }
        }
      add("A3(i)", a, true, ok, detail);
    }

    // A3(iii): one preference peer moving to v changes R(v|.,C) in the same
    // direction for every menu containing v.
    {
      bool applicable = n_nr >= 1;
      bool ok = true;
      std::string detail;
      for (int v = 1; v <= Y && applicable && ok; ++v) {
        int sign = 0;
        for (std::uint32_t bits = 0; bits < (std::uint32_t{1} << Y) && ok; ++bits) {
          const std::uint32_t set_mask = (bits << 1) | 1u;
          if (!(set_mask & (std::uint32_t{1} << v))) continue;
          std::vector<int> zero(Y, 0), bumped(Y, 0);
          bumped[v - 1] = 1;
          const double d = r_value(m, a, v, set_mask, bumped) - r_value(m, a, v, set_mask, zero);
          if (std::abs(d) <= tol) {
            ok = false;
            detail = "preference effect vanishes for v=" + std::to_string(v) + " on a menu";
          } else if (sign == 0) {
            sign = d > 0 ? 1 : -1;
          } else if ((d > 0 ? 1 : -1) != sign) {
            ok = false;
            detail = "preference effect changes sign across menus for v=" + std::to_string(v);
          }
        }
      }
      add("A3(iii)", a, applicable, ok, detail);
    }

    // A4: joint peers require an exclusive peer on one side.
    {
      const bool has_joint = !m.net.ncr(a).empty();
      const bool ok = !has_joint || !m.net.consideration_only(a).empty() ||
                      !m.net.preference_only(a).empty();
      add("A4", a, has_joint, ok,
          ok ? "" : "joint peers present but both exclusive groups are empty");
    }

    // A5(i): somewhere on the support, bumping both counts of v moves ln CCP.
    {
      bool applicable = false;
      bool ok = false;
      std::string detail;
      for (int v = 1; v <= Y && !ok; ++v)
        for (const auto& [nr_c, nc_c] : support) {
          auto nr2 = nr_c, nc2 = nc_c;
          ++nr2[v - 1];
          ++nc2[v - 1];
          if (!reachable(nr2, nc2)) continue;
          applicable = true;
          const double d = log_ccp(v, nr2, nc2) - log_ccp(v, nr_c, nc_c);
          if (std::abs(d) > tol) {
            ok = true;
            detail = "witness v=" + std::to_string(v) + " at " + detail::join_counts(nr_c, nc_c);
            break;
          }
        }
      add("A5(i)", a, applicable, ok,
          ok ? detail : "own-alternative double increment never moves ln CCP");
    }

    // A5(ii): the three cross double differences, each needing a nonzero
    // somewhere on the support. The inner increment always bumps nr_v; the
    // outer one bumps nr_w, nc_w, or both.
    for (int variant = 0; variant < 3; ++variant) {
      const bool outer_nr = variant == 0 || variant == 2;
      const bool outer_nc = variant == 1 || variant == 2;
      const std::string name = variant == 0   ? "A5(ii)-preference"
                               : variant == 1 ? "A5(ii)-consideration"
                                              : "A5(ii)-joint";
      bool applicable = false;
      bool ok = false;
      std::string detail;
      for (int v = 1; v <= Y && !ok; ++v)
        for (int w = 1; w <= Y && !ok; ++w) {
          if (w == v) continue;
          for (const auto& [nr_c, nc_c] : support) {
            auto nr_v = nr_c;
            ++nr_v[v - 1];
            auto nr_w = nr_c, nc_w = nc_c;
            if (outer_nr) ++nr_w[w - 1];
            if (outer_nc) ++nc_w[w - 1];
            auto nr_vw = nr_v, nc_vw = nc_w;
            if (outer_nr) ++nr_vw[w - 1];
            if (!reachable(nr_v, nc_c) || !reachable(nr_w, nc_w) || !reachable(nr_vw, nc_vw))
              continue;
            applicable = true;
            const double dd = (log_ccp(v, nr_vw, nc_vw) - log_ccp(v, nr_w, nc_w)) -
                              (log_ccp(v, nr_v, nc_c) - log_ccp(v, nr_c, nc_c));
            if (std::abs(dd) > tol) {
              ok = true;
              detail = "witness v=" + std::to_string(v) + " w=" + std::to_string(w) + " at " +
                       detail::join_counts(nr_c, nc_c);
              break;
            }
          }
        }
      add(name, a, applicable, ok, ok ? detail : "double difference never moves ln CCP");
    }
  }
  return rep;
}

}  // namespace peernet
