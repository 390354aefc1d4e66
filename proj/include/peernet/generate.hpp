#pragma once

// Model generators for experiments and tests.
//
// random_model draws a tabular model and rejects draws that fail the
// assumption validator; margins keep the identifying inequalities bounded
// away from zero so statistical tests have something to detect. The gate
// options additionally force the side conditions of the constructive
// identification steps (enough exclusive consideration peers, group sizes).
// Logistic-in-counts helpers build tables from a low-dimensional parameter,
// for callers who want smooth comparative statics rather than raw draws.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "peernet/model.hpp"
#include "peernet/rng.hpp"
#include "peernet/validate.hpp"

namespace peernet {

struct GeneratorOptions {
  int n_agents = 3;
  int menu_max = 2;
  double p_extra_consideration = 0.35;  // chance a spare peer joins NC only
  double p_extra_preference = 0.35;     // chance a spare peer joins NR only
  double p_extra_joint = 0.2;           // chance a spare peer joins both
  bool enforce_gates = true;            // identification side conditions
  double q_low = 0.15;
  double q_high = 0.9;
  double q_ratio_margin = 0.05;         // lower bound on |log| consideration ratios
  double r_effect_margin = 0.02;        // lower bound on the preference effect
  double lambda_low = 0.5;
  double lambda_high = 2.0;
  int max_attempts = 200;
};

namespace detail {

// All count vectors over the menu's non-default alternatives with sum <= cap.
inline std::vector<std::vector<int>> count_vectors(int n_alts, int cap) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(n_alts, 0);
  auto rec = [&](auto&& self, int i, int left) -> void {
    if (i == n_alts) {
      out.push_back(cur);
      return;
    }
    for (int k = 0; k <= left; ++k) {
      cur[i] = k;
      self(self, i + 1, left - k);
    }
    cur[i] = 0;
  };
  rec(rec, 0, cap);
  return out;
}

inline std::vector<double> dirichlet_row(RngStream& rng, int k, double floor_mass) {
  std::vector<double> row(k);
  double total = 0.0;
  for (int i = 0; i < k; ++i) {
    row[i] = floor_mass + rng.exponential(1.0);
    total += row[i];
  }
  for (double& x : row) x /= total;
  return row;
}

}  // namespace detail

inline ModelSpec random_model(const GeneratorOptions& opt, std::uint64_t seed) {
  require(opt.n_agents >= 2, "random_model: need at least two agents");
  require(opt.menu_max >= 1, "random_model: menu needs a non-default alternative");
  RngStream rng(seed);
  const int A = opt.n_agents;
  const int Y = opt.menu_max;

  for (int attempt = 0; attempt < opt.max_attempts; ++attempt) {
    ModelSpec m;
    m.menu_max = Y;
    m.net.nc.assign(A, {});
    m.net.nr.assign(A, {});
    m.lambda.assign(A, 0.0);
    m.q.assign(A, {});
    m.r.assign(A, {});

    for (int a = 0; a < A; ++a) {
      m.lambda[a] = opt.lambda_low + (opt.lambda_high - opt.lambda_low) * rng.uniform();
      std::vector<int> others;
      for (int b = 0; b < A; ++b)
        if (b != a) others.push_back(b);

      std::vector<int> nc, nr;
      std::size_t next = 0;
      if (opt.enforce_gates) {
        // The exclusion machinery consumes one consideration-only peer per
        // removed alternative, and the classification step needs a second
        // peer; reserve the lowest indices for those roles.
        const std::size_t need_exclusive =
            std::min<std::size_t>(others.size(), std::max(1, Y - 1));
        for (; next < need_exclusive; ++next) nc.push_back(others[next]);
      }
      for (; next < others.size(); ++next) {
        const double u = rng.uniform();
        if (u < opt.p_extra_joint) {
          nc.push_back(others[next]);
          nr.push_back(others[next]);
        } else if (u < opt.p_extra_joint + opt.p_extra_consideration) {
          nc.push_back(others[next]);
        } else if (u < opt.p_extra_joint + opt.p_extra_consideration + opt.p_extra_preference) {
          nr.push_back(others[next]);
        }
      }
      std::sort(nc.begin(), nc.end());
      std::sort(nr.begin(), nr.end());
      m.net.nc[a] = nc;
      m.net.nr[a] = nr;
      if (opt.enforce_gates) {
        // Classification needs two peers; top up with a preference-only peer.
        auto peers = m.net.peers(a);
        for (std::size_t i = 0; i < others.size() && peers.size() < 2; ++i) {
          const int b = others[i];
          if (std::find(peers.begin(), peers.end(), b) == peers.end()) {
            m.net.nr[a].push_back(b);
            std::sort(m.net.nr[a].begin(), m.net.nr[a].end());
            peers = m.net.peers(a);
          }
        }
      }
      if (!m.net.ncr(a).empty() && m.net.consideration_only(a).empty() &&
          m.net.preference_only(a).empty()) {
        // Restore the exclusion condition by releasing the lowest joint peer
        // from the consideration side.
        const int b = m.net.ncr(a).front();
        auto& ncs = m.net.nc[a];
        ncs.erase(std::find(ncs.begin(), ncs.end(), b));
      }

      const int n_nc = static_cast<int>(m.net.nc[a].size());
      m.q[a].assign(Y, {});
      for (int v = 1; v <= Y; ++v) {
        auto& tab = m.q[a][v - 1];
        for (int tries = 0; tries < 200; ++tries) {
          tab.clear();
          for (int n = 0; n <= n_nc; ++n)
            tab.push_back(opt.q_low + (opt.q_high - opt.q_low) * rng.uniform());
          bool ok = true;
          if (n_nc >= 1 && std::abs(std::log(tab[1] / tab[0])) < opt.q_ratio_margin) ok = false;
          if (ok && n_nc >= 2 &&
              std::abs(std::log(tab[1] / tab[0]) - std::log(tab[2] / tab[1])) <
                  opt.q_ratio_margin)
            ok = false;
          if (ok) break;
        }
      }

      const int n_nr = static_cast<int>(m.net.nr[a].size());
      auto& rule = m.r[a];
      for (std::uint32_t bits = 0; bits < (std::uint32_t{1} << Y); ++bits) {
        const std::uint32_t menu_mask = (bits << 1) | 1u;
        const auto alts = menu_alternatives(menu_mask, Y);
        const int k = static_cast<int>(alts.size());
        auto& by_counts = rule.rows[menu_mask];
        const auto keys = detail::count_vectors(k - 1, n_nr);
        // Per non-default alternative of the menu, the direction in which one
        // preference peer moves its pick probability; fixed across menus.
        for (const auto& key : keys) by_counts[key] = {};
        for (auto& [key, row] : by_counts) row = detail::dirichlet_row(rng, k, 0.25);
      }
    }

    // Re-impose the sign condition: for each alternative, one peer on it moves
    // R(v|.) in a direction chosen once, in every menu containing v.
    for (int a = 0; a < A; ++a) {
      if (m.net.nr[a].empty()) continue;
      std::vector<int> sign(Y + 1, 0);
      for (int v = 1; v <= Y; ++v) sign[v] = rng.uniform() < 0.5 ? 1 : -1;
      for (auto& [mask, by_counts] : m.r[a].rows) {
        const auto alts = menu_alternatives(mask, Y);
        for (auto& [key, row] : by_counts) {
          int nonzero = 0, total = 0, which = -1;
          for (std::size_t i = 0; i < key.size(); ++i) {
            total += key[i];
            if (key[i] > 0) {
              ++nonzero;
              which = static_cast<int>(i);
            }
          }
          if (nonzero != 1 || total != 1) continue;
          const int v = alts[which + 1];
          const auto& base = by_counts.at(std::vector<int>(key.size(), 0));
          const std::size_t vi = static_cast<std::size_t>(which) + 1;
          for (int tries = 0; tries < 400; ++tries) {
            const double d = row[vi] - base[vi];
            if (d * sign[v] > opt.r_effect_margin) break;
            row = detail::dirichlet_row(rng, static_cast<int>(alts.size()), 0.25);
          }
        }
      }
    }

    check_model_structure(m);
    if (validate_assumptions(m).all_pass()) return m;
  }
  throw std::runtime_error("random_model: no validator-passing draw within the attempt budget");
}

// Logistic-in-count consideration table: Q(v|n) = F(intercept + slope n).
inline std::vector<double> logistic_consideration_table(double intercept, double slope,
                                                        int group_size) {
  std::vector<double> tab;
  for (int n = 0; n <= group_size; ++n)
    tab.push_back(1.0 / (1.0 + std::exp(-(intercept + slope * n))));
  return tab;
}

// Logistic choice rule: utility base[v] + slope[v] * count_v for non-default
// alternatives, zero for the default, softmax over each menu. Produces rows
// for every count vector with sum <= group_size.
inline ChoiceRule logistic_choice_rule(int menu_max, int group_size,
                                       const std::vector<double>& base,
                                       const std::vector<double>& slope) {
  require(static_cast<int>(base.size()) == menu_max && static_cast<int>(slope.size()) == menu_max,
          "logistic_choice_rule: need one base and slope per non-default alternative");
  ChoiceRule rule;
  for (std::uint32_t bits = 0; bits < (std::uint32_t{1} << menu_max); ++bits) {
    const std::uint32_t menu_mask = (bits << 1) | 1u;
    const auto alts = menu_alternatives(menu_mask, menu_max);
    auto& by_counts = rule.rows[menu_mask];
    for (const auto& key : detail::count_vectors(static_cast<int>(alts.size()) - 1, group_size)) {
      std::vector<double> row;
      double total = 0.0;
      for (std::size_t i = 0; i < alts.size(); ++i) {
        const int v = alts[i];
        const double u = v == 0 ? 0.0 : base[v - 1] + slope[v - 1] * key[i - 1];
        row.push_back(std::exp(u));
        total += row.back();
      }
      for (double& x : row) x /= total;
      by_counts[key] = row;
    }
  }
  return rule;
}

}  // namespace peernet
