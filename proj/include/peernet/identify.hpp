#pragma once

// Constructive identification from conditional choice probabilities.
//
// Everything here consumes a CcpTable (exact or estimated) and applies the
// log-CCP difference machinery:
//  - edges: a peer is any agent whose switch moves some log CCP;
//  - classification: a peer is consideration-only iff every cross-alternative
//    double difference (peer to v, witness to w != v) of ln P(v|.) vanishes;
//  - preference peers split into two magnitude groups, one of which is the
//    joint (consideration-and-preference) group; a consideration-only peer or
//    the constructed-peer switch resolves which;
//  - consideration ratio ladders: switching one exclusive consideration peer
//    off v while the rest of the group sits at chosen positions isolates
//    Q(v|n)/Q(v|n-1) rung by rung;
//  - menu exclusions: the two-point formula P* = (P(switch) - t P)/(1 - t)
//    removes one alternative per exclusive consideration peer held at 0;
//  - absolute tables: an anchor per alternative pins Q, then choice-rule rows
//    follow recursively from binary menus upward;
//  - binary menus (Y=1) with one known side of the network resolve through
//    the exclusion restriction and the same double differences.
//
// Zero tests run in exact mode (absolute threshold on log differences) or
// statistical mode (threshold = multiplier times the delta-method standard
// error of the tested combination). Every executed test lands in an evidence
// log; enlarging the available cell set can only add positive findings.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "peernet/model.hpp"
#include "peernet/recovery.hpp"

namespace peernet {

struct TestPolicy {
  enum class Mode { exact, statistical };
  Mode mode = Mode::exact;
  double zero_tol = 1e-9;     // exact-mode threshold on log differences
  double se_multiplier = 3.0;  // statistical-mode multiplier on the SE
};

struct EvidenceRecord {
  int agent = -1;
  std::string test;
  std::string detail;
  double statistic = 0.0;
  double cutoff = 0.0;
  std::string verdict;  // "nonzero", "zero", "unavailable"
};

struct EvidenceLog {
  std::vector<EvidenceRecord> records;
  void add(int agent, const std::string& test, const std::string& detail, double stat,
           double cutoff, const std::string& verdict) {
    records.push_back({agent, test, detail, stat, cutoff, verdict});
  }
};

namespace idetail {

struct Term {
  double coef;
  std::int64_t state;
  int alt;
};

struct ZeroTest {
  bool available = false;
  bool nonzero = false;
  double statistic = 0.0;
  double cutoff = 0.0;
};

inline ZeroTest log_combo_test(const CcpTable& ccp, int a, const std::vector<Term>& terms,
                               const TestPolicy& policy) {
  ZeroTest t;
  double value = 0.0, var = 0.0;
  for (const auto& term : terms) {
    if (!ccp.has(a, term.state)) return t;
    const double p = ccp.p[a](term.state, term.alt);
    if (p <= 0.0) return t;
    value += term.coef * std::log(p);
    var += term.coef * term.coef * ccp.log_var(a, term.state, term.alt);
  }
  t.available = true;
  t.statistic = value;
  t.cutoff = policy.mode == TestPolicy::Mode::exact
                 ? policy.zero_tol
                 : std::max(policy.zero_tol, policy.se_multiplier * std::sqrt(var));
  t.nonzero = std::abs(value) > t.cutoff;
  return t;
}

inline std::string config_str(const Config& y) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < y.size(); ++i) os << (i ? "," : "") << y[i];
  os << ")";
  return os.str();
}

// Single difference ln P_a(v|y') - ln P_a(v|y) where y' = y with a' -> to.
inline ZeroTest single_diff(const CcpTable& ccp, int a, int v, const Config& y, int a_prime,
                            int to, const TestPolicy& policy) {
  const auto s0 = config_index(y, ccp.menu_max);
  const auto s1 = config_index(switched(y, a_prime, to), ccp.menu_max);
  return log_combo_test(ccp, a, {{1.0, s1, v}, {-1.0, s0, v}}, policy);
}

}  // namespace idetail

// ---------------------------------------------------------------------------
// Edges
// ---------------------------------------------------------------------------

// Peers of each agent: a' is a peer of a iff some switch of a' alone moves
// some log CCP of a. Canonical witnesses (a' switched from the all-default
// configuration) are tried first, then every available pair of cells.
inline std::vector<std::vector<int>> recover_reference_groups(const CcpTable& ccp,
                                                              const TestPolicy& policy,
                                                              EvidenceLog* evidence = nullptr) {
  const int A = ccp.n_agents;
  const int Y = ccp.menu_max;
  const std::int64_t S = ccp.n_states();
  std::vector<std::vector<int>> groups(A);
  for (int a = 0; a < A; ++a) {
    for (int ap = 0; ap < A; ++ap) {
      if (ap == a) continue;
      bool found = false;
      double best_stat = 0.0, best_cut = 0.0;
      bool any_available = false;
      const Config zero(A, 0);
      for (int w = 1; w <= Y && !found; ++w)
        for (int v = 1; v <= Y && !found; ++v) {
          const auto t = idetail::single_diff(ccp, a, v, zero, ap, w, policy);
          if (!t.available) continue;
          any_available = true;
          if (std::abs(t.statistic) > std::abs(best_stat)) {
            best_stat = t.statistic;
            best_cut = t.cutoff;
          }
          if (t.nonzero) {
            found = true;
            best_stat = t.statistic;
            best_cut = t.cutoff;
            if (evidence)
              evidence->add(a, "edge", "peer " + std::to_string(ap) + " canonical switch to " +
                                           std::to_string(w) + ", ln P(" + std::to_string(v) +
                                           "|.)",
                            t.statistic, t.cutoff, "nonzero");
          }
        }
      for (std::int64_t s = 0; s < S && !found; ++s) {
        const Config y = config_from_index(s, A, Y);
        if (y[ap] != 0) continue;  // each unordered pair visited once, from its zero side
        for (int w = 1; w <= Y && !found; ++w)
          for (int v = 0; v <= Y && !found; ++v) {
            const auto t = idetail::single_diff(ccp, a, v, y, ap, w, policy);
            if (!t.available) continue;
            any_available = true;
            if (std::abs(t.statistic) > std::abs(best_stat)) {
              best_stat = t.statistic;
              best_cut = t.cutoff;
            }
            if (t.nonzero) {
              found = true;
              best_stat = t.statistic;
              best_cut = t.cutoff;
              if (evidence)
                evidence->add(a, "edge", "peer " + std::to_string(ap) + " at " +
                                             idetail::config_str(y) + " switch to " +
                                             std::to_string(w) + ", ln P(" + std::to_string(v) +
                                             "|.)",
                              t.statistic, t.cutoff, "nonzero");
            }
          }
      }
      if (found) {
        groups[a].push_back(ap);
      } else if (evidence) {
        evidence->add(a, "edge", "peer " + std::to_string(ap) + " all switches",
                      best_stat, best_cut, any_available ? "zero" : "unavailable");
      }
    }
  }
  return groups;
}

// ---------------------------------------------------------------------------
// Classification
// ---------------------------------------------------------------------------

struct AgentIdentification {
  std::vector<int> peers;
  bool classified = false;
  std::vector<int> consideration_only;
  std::vector<int> preference;  // candidate preference group (joint peers included)
  std::vector<int> group_a, group_b;  // magnitude split of preference; one is the joint group
  bool resolved = false;
  std::vector<int> ncr, preference_only;
  std::vector<int> nc, nr;  // final reference groups once resolved
  std::string status;       // empty when the stage pipeline ran clean
};

namespace idetail {

// Cross-alternative double difference: switch a' from 0 to v inside
// ln P_a(v|.), before and after a witness a'' switches from 0 to w != v.
// Zero for every admissible choice iff a' does not enter preferences.
inline ZeroTest cross_dd(const CcpTable& ccp, int a, int ap, int app, int v, int w,
                         const Config& base, const TestPolicy& policy) {
  const int Y = ccp.menu_max;
  const auto s00 = config_index(base, Y);
  const auto s10 = config_index(switched(base, ap, v), Y);
  const auto s01 = config_index(switched(base, app, w), Y);
  const auto s11 = config_index(switched(switched(base, ap, v), app, w), Y);
  return log_combo_test(
      ccp, a, {{1.0, s11, v}, {-1.0, s01, v}, {-1.0, s10, v}, {1.0, s00, v}}, policy);
}

inline std::string join(const std::vector<int>& xs) {
  std::ostringstream os;
  os << "{";
  for (std::size_t i = 0; i < xs.size(); ++i) os << (i ? "," : "") << xs[i];
  os << "}";
  return os.str();
}

}  // namespace idetail

// Classify each peer of a as consideration-only or preference-involved, then
// split the preference peers into the two magnitude groups by their canonical
// switch values. Requires at least two alternatives and two peers.
inline void classify_peers(const CcpTable& ccp, AgentIdentification& ident, int a,
                           const TestPolicy& policy, EvidenceLog* evidence = nullptr) {
  const int A = ccp.n_agents;
  const int Y = ccp.menu_max;
  require(Y >= 2, "classify_peers: needs at least two non-default alternatives");
  require(ident.peers.size() >= 2, "classify_peers: needs at least two peers");

  ident.consideration_only.clear();
  ident.preference.clear();

  for (int ap : ident.peers) {
    bool is_preference = false;
    bool all_zero_available = true;
    for (int app : ident.peers) {
      if (app == ap || is_preference) continue;
      for (int v = 1; v <= Y && !is_preference; ++v)
        for (int w = 1; w <= Y && !is_preference; ++w) {
          if (w == v) continue;
          // Canonical base first, then every configuration holding both at 0.
          bool tested = false;
          for (std::int64_t s = 0; s < ccp.n_states() && !is_preference; ++s) {
            const Config base = config_from_index(s, A, Y);
            if (base[ap] != 0 || base[app] != 0) continue;
            const auto t = idetail::cross_dd(ccp, a, ap, app, v, w, base, policy);
            if (!t.available) continue;
            tested = true;
            if (t.nonzero) {
              is_preference = true;
              if (evidence)
                evidence->add(a, "cross_dd",
                              "peer " + std::to_string(ap) + " witness " + std::to_string(app) +
                                  " v=" + std::to_string(v) + " w=" + std::to_string(w) +
                                  " base " + idetail::config_str(base),
                              t.statistic, t.cutoff, "nonzero");
            }
          }
          if (!tested) all_zero_available = false;
        }
    }
    if (is_preference) {
      ident.preference.push_back(ap);
    } else {
      ident.consideration_only.push_back(ap);
      if (!all_zero_available && policy.mode == TestPolicy::Mode::statistical)
        ident.status += "peer " + std::to_string(ap) + " classified on partial cells; ";
      if (evidence)
        evidence->add(a, "cross_dd", "peer " + std::to_string(ap) + " all double differences",
                      0.0, policy.zero_tol, "zero");
    }
  }

  // Magnitude split of the preference group by the vector of canonical switch
  // values (one component per alternative). Joint peers shift every component
  // by the consideration log ratio, so the two groups separate componentwise.
  const Config zero(A, 0);
  std::vector<std::vector<double>> value(ident.preference.size());
  std::vector<std::vector<double>> var(ident.preference.size());
  for (std::size_t i = 0; i < ident.preference.size(); ++i)
    for (int v = 1; v <= Y; ++v) {
      const auto s0 = config_index(zero, Y);
      const auto s1 = config_index(switched(zero, ident.preference[i], v), Y);
      value[i].push_back(std::log(ccp.at(a, s1, v)) - std::log(ccp.at(a, s0, v)));
      var[i].push_back(ccp.log_var(a, s1, v) + ccp.log_var(a, s0, v));
    }
  // Single-linkage grouping: peers join a group when every component agrees.
  std::vector<int> label(ident.preference.size(), -1);
  int n_groups = 0;
  for (std::size_t i = 0; i < ident.preference.size(); ++i) {
    if (label[i] >= 0) continue;
    label[i] = n_groups++;
    for (std::size_t j = 0; j < ident.preference.size(); ++j) {
      if (label[j] >= 0) continue;
      bool close = true;
      for (int v = 0; v < Y && close; ++v) {
        const double cutoff =
            policy.mode == TestPolicy::Mode::exact
                ? policy.zero_tol
                : std::max(policy.zero_tol,
                           policy.se_multiplier * std::sqrt(var[i][v] + var[j][v]));
        if (std::abs(value[i][v] - value[j][v]) > cutoff) close = false;
      }
      if (close) label[j] = label[i];
    }
  }
  ident.group_a.clear();
  ident.group_b.clear();
  if (n_groups > 2) {
    ident.status += "preference peers split into more than two magnitude groups; ";
  } else {
    for (std::size_t i = 0; i < ident.preference.size(); ++i)
      (label[i] == 0 ? ident.group_a : ident.group_b).push_back(ident.preference[i]);
  }
  ident.classified = n_groups <= 2;
  if (evidence)
    evidence->add(a, "magnitude_split",
                  "groups " + idetail::join(ident.group_a) + " / " + idetail::join(ident.group_b),
                  static_cast<double>(n_groups), 2.0, n_groups <= 2 ? "zero" : "nonzero");
}

// ---------------------------------------------------------------------------
// Joint-group resolution
// ---------------------------------------------------------------------------

// Decide which magnitude group is the joint group. With an exclusive
// consideration peer a', the same-alternative double difference against a'
// is nonzero exactly for joint peers. Without one, the constructed switch
// (a' in one group from v to 0, a'' in the other from 0 to v) replays a
// consideration-only switch, and a third peer's difference against it is
// zero exactly when that peer is preference-only.
inline void resolve_ncr(const CcpTable& ccp, AgentIdentification& ident, int a,
                        const TestPolicy& policy, EvidenceLog* evidence = nullptr) {
  const int A = ccp.n_agents;
  const int Y = ccp.menu_max;
  require(ident.classified, "resolve_ncr: classification must precede resolution");
  const Config zero(A, 0);

  auto finish = [&](std::vector<int> ncr, std::vector<int> pref_only) {
    std::sort(ncr.begin(), ncr.end());
    std::sort(pref_only.begin(), pref_only.end());
    ident.ncr = ncr;
    ident.preference_only = pref_only;
    ident.nc = NetworkStructure::set_or(ident.consideration_only, ident.ncr);
    ident.nr = NetworkStructure::set_or(ident.preference_only, ident.ncr);
    ident.resolved = true;
  };

  if (ident.preference.empty()) {
    finish({}, {});
    return;
  }

  if (!ident.consideration_only.empty()) {
    const int ap = ident.consideration_only.front();
    std::vector<int> ncr, pref_only;
    for (int app : ident.preference) {
      bool joint = false;
      bool decided = false;
      for (int v = 1; v <= Y && !joint; ++v) {
        const auto t = idetail::cross_dd(ccp, a, ap, app, v, v, zero, policy);
        if (!t.available) continue;
        decided = true;
        if (t.nonzero) joint = true;
        if (evidence)
          evidence->add(a, "same_dd",
                        "exclusive peer " + std::to_string(ap) + " against " +
                            std::to_string(app) + " v=" + std::to_string(v),
                        t.statistic, t.cutoff, t.nonzero ? "nonzero" : "zero");
      }
      if (!decided) {
        ident.status += "joint test unavailable for peer " + std::to_string(app) + "; ";
        return;
      }
      (joint ? ncr : pref_only).push_back(app);
    }
    // Group consistency: the magnitude split and the per-peer verdicts must
    // agree; a mismatch marks the table as inconsistent with the model.
    for (const auto* g : {&ident.group_a, &ident.group_b}) {
      bool any_joint = false, any_pref = false;
      for (int p : *g) {
        if (std::find(ncr.begin(), ncr.end(), p) != ncr.end()) any_joint = true;
        if (std::find(pref_only.begin(), pref_only.end(), p) != pref_only.end()) any_pref = true;
      }
      if (any_joint && any_pref) {
        ident.status += "magnitude group mixes joint and preference-only verdicts; ";
        return;
      }
    }
    finish(ncr, pref_only);
    return;
  }

  // No exclusive consideration peer. An empty magnitude group forces an empty
  // joint group: a nonempty joint group would leave both exclusive sides
  // empty, violating the network exclusion condition.
  if (ident.group_a.empty() || ident.group_b.empty()) {
    finish({}, ident.preference);
    return;
  }

  if (ident.peers.size() < 3) {
    ident.status += "cannot resolve the joint group: two magnitude groups but fewer than "
                    "three peers and no exclusive consideration peer; ";
    return;
  }

  const int ap = ident.group_a.front();
  const int app = ident.group_b.front();
  int third = -1;
  for (int p : ident.preference)
    if (p != ap && p != app) {
      third = p;
      break;
    }

  for (int v = 1; v <= Y; ++v) {
    const Config y = switched(zero, ap, v);                      // a' picks v
    const Config z = switched(zero, app, v);                     // constructed switch
    const auto sy0 = config_index(y, Y);
    const auto sy1 = config_index(switched(y, third, v), Y);
    const auto sz0 = config_index(z, Y);
    const auto sz1 = config_index(switched(z, third, v), Y);
    const auto t = idetail::log_combo_test(
        ccp, a, {{1.0, sy1, v}, {-1.0, sy0, v}, {-1.0, sz1, v}, {1.0, sz0, v}}, policy);
    if (!t.available) continue;
    if (evidence)
      evidence->add(a, "constructed_peer",
                    "third peer " + std::to_string(third) + " across " + idetail::config_str(y) +
                        " vs " + idetail::config_str(z) + " v=" + std::to_string(v),
                    t.statistic, t.cutoff, t.nonzero ? "nonzero" : "zero");
    const bool third_in_a =
        std::find(ident.group_a.begin(), ident.group_a.end(), third) != ident.group_a.end();
    // Nonzero difference marks the third peer as joint; its group is then the
    // joint group, and the other group is preference-only.
    const bool third_joint = t.nonzero;
    const bool a_is_joint = third_in_a == third_joint;
    if (a_is_joint)
      finish(ident.group_a, ident.group_b);
    else
      finish(ident.group_b, ident.group_a);
    return;
  }
  ident.status += "constructed-peer test unavailable; ";
}

// ---------------------------------------------------------------------------
// Consideration ratio ladders
// ---------------------------------------------------------------------------

struct QRatioTable {
  // ratio[a][v-1][n] = Q_a(v|n+1) / Q_a(v|n); NaN marks an unavailable rung.
  std::vector<std::vector<std::vector<double>>> ratio;

  bool complete(int a) const {
    for (const auto& per_v : ratio.at(a))
      for (double r : per_v)
        if (!std::isfinite(r)) return false;
    return true;
  }
};

// Ratio of CCPs across one switch, with availability bookkeeping.
namespace idetail {

inline std::optional<double> ccp_ratio(const CcpTable& ccp, int a, int v, const Config& num,
                                       const Config& den) {
  const auto sn = config_index(num, ccp.menu_max);
  const auto sd = config_index(den, ccp.menu_max);
  if (!ccp.has(a, sn) || !ccp.has(a, sd)) return std::nullopt;
  const double pn = ccp.p[a](sn, v);
  const double pd = ccp.p[a](sd, v);
  if (pn <= 0.0 || pd <= 0.0) return std::nullopt;
  return pn / pd;
}

}  // namespace idetail

// Recover Q_a(v|n)/Q_a(v|n-1) for every v and n from ladder configurations.
// With an exclusive consideration peer the ladder switches it off v while
// joint peers step down from v one at a time, then exclusive peers step down;
// without one, a preference-only peer and a joint peer switch in opposite
// directions to keep the preference counts fixed. Lowest-index peers are
// consumed first throughout.
inline void recover_q_ratios(const CcpTable& ccp, AgentIdentification& ident, int a,
                             QRatioTable& table, EvidenceLog* evidence = nullptr) {
  const int A = ccp.n_agents;
  const int Y = ccp.menu_max;
  require(ident.resolved, "recover_q_ratios: network resolution must precede ratios");
  auto& per_agent = table.ratio.at(a);
  per_agent.assign(Y, {});
  const auto& nc = ident.nc;
  const int n_nc = static_cast<int>(nc.size());
  for (int v = 1; v <= Y; ++v) per_agent[v - 1].assign(n_nc, std::nan(""));
  if (n_nc == 0) return;

  const auto& cons = ident.consideration_only;
  const auto& joint = ident.ncr;
  const Config zero(A, 0);

  for (int v = 1; v <= Y; ++v) {
    auto record = [&](int n, const Config& num, const Config& den,
                      const std::optional<double>& r) {
      if (r) {
        per_agent[v - 1][n - 1] = *r;
        if (evidence)
          evidence->add(a, "q_ratio",
                        "v=" + std::to_string(v) + " n=" + std::to_string(n) + " from " +
                            idetail::config_str(num) + " / " + idetail::config_str(den),
                        *r, 0.0, "nonzero");
      } else if (evidence) {
        evidence->add(a, "q_ratio", "v=" + std::to_string(v) + " n=" + std::to_string(n),
                      0.0, 0.0, "unavailable");
      }
    };

    if (!cons.empty()) {
      const int ap = cons.front();
      // Joint peers step off v: rungs n = |NC| down to |NC| - |NCR|.
      for (int j = 0; j <= static_cast<int>(joint.size()); ++j) {
        Config y = zero;
        for (int p : nc) y[p] = v;
        for (int i = 0; i < j; ++i) y[joint[i]] = 0;
        const int n = n_nc - j;
        record(n, y, switched(y, ap, 0), idetail::ccp_ratio(ccp, a, v, y, switched(y, ap, 0)));
      }
      // Exclusive peers step off v: rungs n = |cons|-1 down to 1, with all
      // joint peers at 0 and the k lowest exclusive peers on v.
      for (int k = static_cast<int>(cons.size()) - 1; k >= 1; --k) {
        Config y = zero;
        for (int i = 0; i < k; ++i) y[cons[i]] = v;
        record(k, y, switched(y, ap, 0), idetail::ccp_ratio(ccp, a, v, y, switched(y, ap, 0)));
      }
    } else if (!joint.empty() && !ident.preference_only.empty()) {
      const int ap = ident.preference_only.front();
      const int app = joint.front();
      std::vector<int> others(joint.begin() + 1, joint.end());
      for (int j = 0; j <= static_cast<int>(others.size()); ++j) {
        Config y = zero;
        for (int p : joint) y[p] = v;
        for (int i = 0; i < j; ++i) y[others[i]] = 0;
        // Paired switch: the preference-only peer onto v, the joint peer off.
        Config y2 = switched(switched(y, ap, v), app, 0);
        const int n = static_cast<int>(joint.size()) - j;
        record(n, y, y2, idetail::ccp_ratio(ccp, a, v, y, y2));
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Menu exclusion counterfactuals
// ---------------------------------------------------------------------------

// Inputs for exclusion arithmetic on one agent: the consideration group, its
// exclusive members (holdable at 0), and the recovered consideration ratios.
struct ExclusionInputs {
  int agent = 0;
  std::vector<int> nc;
  std::vector<int> consideration_only;
  std::vector<std::vector<double>> q_ratio;  // [v-1][n]
};

// P_a(v | y, menu minus removed) from full-menu CCPs. Each removed
// alternative consumes one exclusive consideration peer currently at 0
// (lowest index first) and applies the two-point elimination with
// t = Q(v'|n+1)/Q(v'|n) at the current consideration count of v'.
inline double counterfactual_ccp(const CcpTable& ccp, const ExclusionInputs& in, int v,
                                 const Config& y, std::vector<int> removed) {
  const int Y = ccp.menu_max;
  const int a = in.agent;
  std::sort(removed.begin(), removed.end());
  require(std::adjacent_find(removed.begin(), removed.end()) == removed.end(),
          "counterfactual_ccp: repeated removed alternative");
  for (int r : removed) {
    require(r >= 1 && r <= Y, "counterfactual_ccp: removed alternative outside the menu");
    require(r != v, "counterfactual_ccp: cannot remove the evaluated alternative");
  }
  require(v >= 0 && v <= Y, "counterfactual_ccp: alternative out of range");

  std::vector<int> holders;
  for (int p : in.consideration_only)
    if (y.at(p) == 0) holders.push_back(p);
  require(holders.size() >= removed.size(),
          "counterfactual_ccp: each removed alternative needs an exclusive consideration "
          "peer held at the default");

  auto nc_count_of = [&](const Config& cfg, int alt) {
    int n = 0;
    for (int p : in.nc)
      if (cfg[p] == alt) ++n;
    return n;
  };

  auto rec = [&](auto&& self, std::size_t depth, const Config& cfg) -> double {
    if (depth == removed.size()) {
      const auto s = config_index(cfg, Y);
      return ccp.at(a, s, v);
    }
    const int vp = removed[depth];
    const int holder = holders[depth];
    const int n = nc_count_of(cfg, vp);
    const auto& ladder = in.q_ratio.at(vp - 1);
    require(n < static_cast<int>(ladder.size()) || ladder.empty(),
            "counterfactual_ccp: consideration count outside the recovered ladder");
    const double t = ladder.empty() ? 1.0 : ladder.at(n);
    require(std::isfinite(t), "counterfactual_ccp: required consideration ratio unavailable");
    require(std::abs(t - 1.0) > 1e-12,
            "counterfactual_ccp: consideration ratio equals one, elimination is singular");
    const double hi = self(self, depth + 1, switched(cfg, holder, vp));
    const double lo = self(self, depth + 1, cfg);
    return (hi - t * lo) / (1.0 - t);
  };
  return rec(rec, 0, y);
}

// ---------------------------------------------------------------------------
// Absolute tables from anchors
// ---------------------------------------------------------------------------

struct Anchor {
  int agent = 0;
  int alternative = 0;
  enum class Kind { consideration, choice } kind = Kind::consideration;
  int count = 0;    // n for Q(v|n), or the preference count for R(v|n,{0,v})
  double value = 0.0;
};

// Extend one known Q value to the whole support through the ratio ladder.
inline std::vector<double> q_from_anchor(const std::vector<double>& ladder, int n_anchor,
                                         double value) {
  const int size = static_cast<int>(ladder.size()) + 1;
  require(n_anchor >= 0 && n_anchor < size, "q_from_anchor: anchored count out of range");
  require(value > 0.0 && value <= 1.0, "q_from_anchor: anchored value outside (0,1]");
  std::vector<double> q(size, 0.0);
  q[n_anchor] = value;
  for (int n = n_anchor + 1; n < size; ++n) q[n] = q[n - 1] * ladder[n - 1];
  for (int n = n_anchor - 1; n >= 0; --n) q[n] = q[n + 1] / ladder[n];
  for (double x : q)
    require_state(x > 0.0 && x <= 1.0 + 1e-9,
                  "q_from_anchor: ladder extension leaves the unit interval");
  return q;
}

// Recover the absolute consideration table and every choice-rule row of one
// agent. Requires one anchor per non-default alternative, full resolution,
// and enough exclusive consideration peers to reach binary menus.
inline void recover_tables_for_agent(const CcpTable& ccp, const AgentIdentification& ident,
                                     const QRatioTable& ratios,
                                     const std::vector<Anchor>& anchors, int a,
                                     std::vector<std::vector<double>>& q_out, ChoiceRule& r_out,
                                     EvidenceLog* evidence = nullptr) {
  const int A = ccp.n_agents;
  const int Y = ccp.menu_max;
  require(ident.resolved, "recover_tables: network resolution required");
  require(static_cast<int>(ident.consideration_only.size()) >= Y - 1,
          "recover_tables: need one exclusive consideration peer per removable alternative");

  ExclusionInputs excl{a, ident.nc, ident.consideration_only, ratios.ratio.at(a)};
  const auto& nr = ident.nr;
  const int n_nr = static_cast<int>(nr.size());
  const Config zero(A, 0);

  auto nc_count_of = [&](const Config& cfg, int alt) {
    int n = 0;
    for (int p : ident.nc)
      if (cfg[p] == alt) ++n;
    return n;
  };

  // Configuration with the lowest unused preference peers spread over the
  // menu's non-default alternatives according to the count vector.
  auto config_for_counts = [&](const std::vector<int>& alts, const std::vector<int>& key) {
    Config y = zero;
    std::size_t next = 0;
    for (std::size_t i = 1; i < alts.size(); ++i)
      for (int c = 0; c < key[i - 1]; ++c) y[nr.at(next++)] = alts[i];
    return y;
  };

  // Pin the absolute consideration scale per alternative.
  q_out.assign(Y, {});
  for (int v = 1; v <= Y; ++v) {
    const Anchor* anchor = nullptr;
    for (const auto& an : anchors)
      if (an.agent == a && an.alternative == v) anchor = &an;
    require(anchor != nullptr, "recover_tables: no anchor for alternative " + std::to_string(v) +
                                   " of agent " + std::to_string(a));
    const auto& ladder = ratios.ratio.at(a).at(v - 1);
    for (double r : ladder)
      require(std::isfinite(r), "recover_tables: incomplete consideration ladder");
    if (anchor->kind == Anchor::Kind::consideration) {
      q_out[v - 1] = q_from_anchor(ladder, anchor->count, anchor->value);
    } else {
      require(anchor->count >= 0 && anchor->count <= n_nr,
              "recover_tables: anchored preference count out of range");
      require(anchor->value > 0.0 && anchor->value <= 1.0,
              "recover_tables: anchored binary pick probability outside (0,1]");
      std::vector<int> key{anchor->count};
      const Config y = config_for_counts({0, v}, key);
      std::vector<int> removed;
      for (int w = 1; w <= Y; ++w)
        if (w != v) removed.push_back(w);
      const double pstar = counterfactual_ccp(ccp, excl, v, y, removed);
      const double q_at = pstar / anchor->value;
      q_out[v - 1] = q_from_anchor(ladder, nc_count_of(y, v), q_at);
    }
    if (evidence)
      evidence->add(a, "q_absolute", "v=" + std::to_string(v), q_out[v - 1][0], 0.0, "nonzero");
  }

  // Choice rules menu by menu, smallest first; each row solves a linear
  // identity whose submenu terms are already known.
  r_out.rows.clear();
  r_out.rows[1u][{}] = {1.0};
  std::vector<std::uint32_t> masks;
  for (std::uint32_t bits = 1; bits < (std::uint32_t{1} << Y); ++bits)
    masks.push_back((bits << 1) | 1u);
  std::sort(masks.begin(), masks.end(), [](std::uint32_t x, std::uint32_t y) {
    const int px = __builtin_popcount(x), py = __builtin_popcount(y);
    return px != py ? px < py : x < y;
  });

  for (const auto mask : masks) {
    const auto alts = menu_alternatives(mask, Y);
    const int k = static_cast<int>(alts.size());
    std::vector<int> removed;
    for (int w = 1; w <= Y; ++w)
      if (!(mask & (std::uint32_t{1} << w))) removed.push_back(w);
    auto& rows = r_out.rows[mask];
    for (const auto& key : [&] {
      std::vector<std::vector<int>> keys;
      std::vector<int> cur(k - 1, 0);
      auto rec = [&](auto&& self, int i, int left) -> void {
        if (i == k - 1) {
          keys.push_back(cur);
          return;
        }
        for (int c = 0; c <= left; ++c) {
          cur[i] = c;
          self(self, i + 1, left - c);
        }
        cur[i] = 0;
      };
      rec(rec, 0, n_nr);
      return keys;
    }()) {
      const Config y = config_for_counts(alts, key);
      std::vector<double> row(k, 0.0);
      double denom = 1.0;
      for (int i = 1; i < k; ++i) denom *= q_out[alts[i] - 1][nc_count_of(y, alts[i])];
      require_state(denom > 0.0, "recover_tables: zero consideration weight");
      double mass = 0.0;
      for (int i = 1; i < k; ++i) {
        const int v = alts[i];
        const double pstar = counterfactual_ccp(ccp, excl, v, y, removed);
        // Subtract the contributions of consideration sets that miss part of
        // the menu; their rows were recovered on smaller menus.
        double correction = 0.0;
        for (std::uint32_t sub = 0; sub < (std::uint32_t{1} << (k - 1)); ++sub) {
          std::uint32_t dmask = 1u;
          for (int j = 1; j < k; ++j)
            if (sub & (std::uint32_t{1} << (j - 1))) dmask |= std::uint32_t{1} << alts[j];
          if (dmask == mask) continue;
          if (!(dmask & (std::uint32_t{1} << v))) continue;
          double w = 1.0;
          std::vector<int> dkey;
          for (int j = 1; j < k; ++j) {
            const double qj = q_out[alts[j] - 1][nc_count_of(y, alts[j])];
            if (dmask & (std::uint32_t{1} << alts[j])) {
              w *= qj;
              dkey.push_back(key[j - 1]);
            } else {
              w *= 1.0 - qj;
            }
          }
          const auto& drow = r_out.rows.at(dmask).at(dkey);
          const auto dalts = menu_alternatives(dmask, Y);
          for (std::size_t t = 0; t < dalts.size(); ++t)
            if (dalts[t] == v) correction += w * drow[t];
        }
        row[i] = (pstar - correction) / denom;
        mass += row[i];
      }
      row[0] = 1.0 - mass;
      for (double& x : row) {
        require_state(x > -1e-6 && x < 1.0 + 1e-6,
                      "recover_tables: recovered choice probability outside [0,1]");
        x = std::min(1.0, std::max(0.0, x));
      }
      rows[key] = row;
    }
  }
}

// ---------------------------------------------------------------------------
// Binary menus with one known side
// ---------------------------------------------------------------------------

enum class KnownSide { none, consideration, preference };

// Resolve NC/NR for Y = 1 when one side is supplied. The exclusion condition
// closes the degenerate cases (known side empty or equal to the peer set);
// otherwise double differences against an exclusive peer, or the magnitude
// set of canonical switches, separate the joint group.
inline void identify_binary_agent(const CcpTable& ccp, AgentIdentification& ident, int a,
                                  KnownSide side, const std::vector<int>& known,
                                  const TestPolicy& policy, EvidenceLog* evidence = nullptr) {
  const int A = ccp.n_agents;
  require(ccp.menu_max == 1, "identify_binary: menu must be binary");
  require(side != KnownSide::none, "identify_binary: a known side is required");
  for (int p : known)
    require(std::find(ident.peers.begin(), ident.peers.end(), p) != ident.peers.end(),
            "identify_binary: known set contains a non-peer");
  const Config zero(A, 0);

  auto finish = [&](std::vector<int> ncv, std::vector<int> nrv) {
    std::sort(ncv.begin(), ncv.end());
    std::sort(nrv.begin(), nrv.end());
    ident.nc = ncv;
    ident.nr = nrv;
    ident.ncr = NetworkStructure::set_and(ident.nc, ident.nr);
    ident.consideration_only = NetworkStructure::set_minus(ident.nc, ident.nr);
    ident.preference_only = NetworkStructure::set_minus(ident.nr, ident.nc);
    ident.preference = ident.nr;
    ident.classified = true;
    ident.resolved = true;
  };

  if (side == KnownSide::preference) {
    const auto& nr = known;
    if (nr.empty()) {
      // No preference peers: joint group empty by exclusion, all peers
      // enter consideration.
      finish(ident.peers, {});
      return;
    }
    if (nr.size() == ident.peers.size()) {
      // Preference covers every peer: a joint peer would leave no exclusive
      // consideration peer, so consideration is empty.
      finish({}, nr);
      return;
    }
    const auto cons_candidates = NetworkStructure::set_minus(ident.peers, nr);
    const int ap = cons_candidates.front();
    std::vector<int> ncv = cons_candidates;  // peers outside NR enter through consideration
    for (int app : nr) {
      const auto t = idetail::cross_dd(ccp, a, ap, app, 1, 1, zero, policy);
      if (!t.available) {
        ident.status += "binary joint test unavailable for peer " + std::to_string(app) + "; ";
        return;
      }
      if (evidence)
        evidence->add(a, "binary_same_dd",
                      "exclusive peer " + std::to_string(ap) + " against " + std::to_string(app),
                      t.statistic, t.cutoff, t.nonzero ? "nonzero" : "zero");
      if (t.nonzero) ncv.push_back(app);
    }
    finish(ncv, nr);
    return;
  }

  // Known consideration side.
  const auto& nck = known;
  if (nck.empty()) {
    finish({}, ident.peers);
    return;
  }
  if (nck.size() == ident.peers.size()) {
    finish(nck, {});
    return;
  }
  const auto pref_only = NetworkStructure::set_minus(ident.peers, nck);
  // Canonical switch magnitudes: consideration peers show the consideration
  // ratio, plus the preference step when they are joint. The preference step
  // itself is the magnitude shown by the known preference-only peers.
  auto canonical = [&](int p) {
    const auto s0 = config_index(zero, 1);
    const auto s1 = config_index(switched(zero, p, 1), 1);
    return std::log(ccp.at(a, s1, 1)) - std::log(ccp.at(a, s0, 1));
  };
  auto canonical_var = [&](int p) {
    const auto s0 = config_index(zero, 1);
    const auto s1 = config_index(switched(zero, p, 1), 1);
    return ccp.log_var(a, s1, 1) + ccp.log_var(a, s0, 1);
  };
  const double step = canonical(pref_only.front());
  std::vector<int> in_a, in_b;
  const double ref = canonical(nck.front());
  for (int p : nck) {
    const double d = canonical(p) - ref;
    const double cutoff = policy.mode == TestPolicy::Mode::exact
                              ? policy.zero_tol
                              : std::max(policy.zero_tol,
                                         policy.se_multiplier *
                                             std::sqrt(canonical_var(p) + canonical_var(nck.front())));
    (std::abs(d) <= cutoff ? in_a : in_b).push_back(p);
  }
  if (in_b.empty()) {
    // One magnitude: a joint peer would differ from an exclusive one by the
    // preference step, so the joint group is empty.
    finish(nck, pref_only);
    return;
  }
  const double va = canonical(in_a.front());
  const double vb = canonical(in_b.front());
  const double cutoff =
      policy.mode == TestPolicy::Mode::exact
          ? policy.zero_tol
          : std::max(policy.zero_tol,
                     policy.se_multiplier *
                         std::sqrt(canonical_var(in_a.front()) + canonical_var(in_b.front()) +
                                   canonical_var(pref_only.front())));
  std::vector<int> joint;
  if (std::abs(va - (vb + step)) <= cutoff)
    joint = in_a;
  else if (std::abs(vb - (va + step)) <= cutoff)
    joint = in_b;
  else {
    ident.status += "binary magnitude groups do not differ by the preference step; ";
    return;
  }
  if (evidence)
    evidence->add(a, "binary_magnitude",
                  "groups " + idetail::join(in_a) + " / " + idetail::join(in_b) +
                      " preference step " + std::to_string(step),
                  va - vb, cutoff, "nonzero");
  finish(nck, NetworkStructure::set_or(pref_only, joint));
}

// ---------------------------------------------------------------------------
// Pipeline
// ---------------------------------------------------------------------------

struct PipelineOptions {
  TestPolicy policy;
  std::vector<Anchor> anchors;  // optional; tables recovered where present
  KnownSide known_side = KnownSide::none;          // binary menus only
  std::vector<std::vector<int>> known_sets;        // per agent, with known_side
  std::optional<std::vector<double>> lambda;       // pass-through decision rates
};

struct IdentificationResult {
  int n_agents = 0;
  int menu_max = 0;
  std::vector<AgentIdentification> agents;
  QRatioTable q_ratios;
  bool structure_complete = false;  // every agent fully resolved
  bool tables_complete = false;     // identified model populated for every agent
  ModelSpec identified;
  EvidenceLog evidence;
};

// Run every applicable stage per agent: edges, classification (or the binary
// known-side route), joint-group resolution, consideration ratios, and, when
// anchors are supplied, absolute tables. Stages that fail a gate leave the
// agent partially identified with the reason in its status.
inline IdentificationResult identify_pipeline(const CcpTable& ccp, const PipelineOptions& opt) {
  IdentificationResult out;
  const int A = ccp.n_agents;
  const int Y = ccp.menu_max;
  out.n_agents = A;
  out.menu_max = Y;
  out.agents.assign(A, {});
  out.q_ratios.ratio.assign(A, {});

  const auto groups = recover_reference_groups(ccp, opt.policy, &out.evidence);
  for (int a = 0; a < A; ++a) out.agents[a].peers = groups[a];

  for (int a = 0; a < A; ++a) {
    auto& ident = out.agents[a];
    if (ident.peers.empty()) {
      ident.classified = true;
      ident.resolved = true;
      ident.nc.clear();
      ident.nr.clear();
    } else if (Y == 1) {
      if (opt.known_side == KnownSide::none) {
        ident.status += "binary menu requires a known network side; ";
      } else {
        require(static_cast<int>(opt.known_sets.size()) == A,
                "identify_pipeline: known_sets must list every agent");
        identify_binary_agent(ccp, ident, a, opt.known_side, opt.known_sets[a], opt.policy,
                              &out.evidence);
      }
    } else if (ident.peers.size() < 2) {
      ident.status += "one peer cannot be classified from choice data alone; ";
    } else {
      classify_peers(ccp, ident, a, opt.policy, &out.evidence);
      if (ident.classified) resolve_ncr(ccp, ident, a, opt.policy, &out.evidence);
    }
    if (ident.resolved) recover_q_ratios(ccp, ident, a, out.q_ratios, &out.evidence);
  }

  out.structure_complete = true;
  for (const auto& ident : out.agents)
    if (!ident.resolved) out.structure_complete = false;

  if (!opt.anchors.empty() && out.structure_complete) {
    ModelSpec m;
    m.menu_max = Y;
    m.net.nc.assign(A, {});
    m.net.nr.assign(A, {});
    m.lambda.assign(A, 1.0);
    if (opt.lambda) {
      require(static_cast<int>(opt.lambda->size()) == A,
              "identify_pipeline: lambda size mismatch");
      m.lambda = *opt.lambda;
    }
    m.q.assign(A, {});
    m.r.assign(A, {});
    bool all = true;
    for (int a = 0; a < A; ++a) {
      auto& ident = out.agents[a];
      m.net.nc[a] = ident.nc;
      m.net.nr[a] = ident.nr;
      bool has_anchor = true;
      for (int v = 1; v <= Y; ++v) {
        bool found = false;
        for (const auto& an : opt.anchors)
          if (an.agent == a && an.alternative == v) found = true;
        if (!found) has_anchor = false;
      }
      if (!has_anchor || !out.q_ratios.complete(a) ||
          static_cast<int>(ident.consideration_only.size()) < Y - 1) {
        all = false;
        ident.status += "absolute tables not recovered (missing anchor, incomplete ladder, "
                        "or too few exclusive consideration peers); ";
        continue;
      }
      recover_tables_for_agent(ccp, ident, out.q_ratios, opt.anchors, a, m.q[a], m.r[a],
                               &out.evidence);
    }
    if (all) {
      out.identified = std::move(m);
      out.tables_complete = true;
    }
  }
  return out;
}

}  // namespace peernet
