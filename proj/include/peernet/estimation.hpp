#pragma once

// Entry-timing model for firms opening stores across markets. Each agent is a
// (firm, market) pair holding a daily opening decision: an attention logit on
// market covariates, focal-market counts, and neighborhood counts, times a
// profit logit on covariates, own counts, and same-market competitor counts.
// The log likelihood sums, per event, survival over the preceding gap plus the
// log probability of the observed opening pattern. Includes the candidate
// neighborhood builder, the maximum-likelihood fitter, curvature-based
// standard errors, and the greedy link-deletion search.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <json.hpp>

#include "peernet/rng.hpp"

namespace peernet {

// ---------------------------------------------------------------------------
// Calendar. Proleptic Gregorian day count with 1970-01-01 = 0.

inline std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned mp = static_cast<unsigned>(m + (m > 2 ? -3 : 9));
  const unsigned doy = (153 * mp + 2) / 5 + static_cast<unsigned>(d) - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

inline std::int64_t parse_iso_date(const std::string& s) {
  if (s.size() < 10 || s[4] != '-' || s[7] != '-')
    throw std::runtime_error("bad date '" + s + "', expected YYYY-MM-DD");
  int y = 0, m = 0, d = 0;
  try {
    y = std::stoi(s.substr(0, 4));
    m = std::stoi(s.substr(5, 2));
    d = std::stoi(s.substr(8, 2));
  } catch (const std::exception&) {
    throw std::runtime_error("bad date '" + s + "', expected YYYY-MM-DD");
  }
  if (m < 1 || m > 12 || d < 1 || d > 31)
    throw std::runtime_error("bad date '" + s + "'");
  return days_from_civil(y, m, d);
}

// ---------------------------------------------------------------------------
// Panel data.

struct FirmEvent {
  double time = 0.0;  // days since panel start
  int firm = 0;
  int market = 0;
  int increment = 1;  // stores added; the opening indicator stays binary
};

struct MarketGeography {
  std::vector<std::string> province;  // per market
  std::vector<double> latitude;
  std::vector<double> longitude;
  std::vector<std::pair<int, int>> borders;  // undirected market pairs
  int n_markets() const { return static_cast<int>(province.size()); }
  bool empty() const { return province.empty(); }
};

struct CovariateSample {
  double time = 0.0;
  std::vector<double> values;
};

struct FirmPanel {
  int n_firms = 0;
  int n_markets = 0;
  int n_covariates = 0;  // measured columns; the intercept is implicit
  double start_time = 0.0;
  std::vector<std::string> firm_names;
  std::vector<std::string> market_names;
  std::vector<std::string> covariate_names;
  std::vector<FirmEvent> events;                       // strictly increasing time
  std::vector<std::vector<int>> initial_counts;        // [firm][market]
  std::vector<std::vector<CovariateSample>> covariates;  // per market, time-sorted
  MarketGeography geography;
};

// Intercept-led covariate row under last-observation-carried-forward. A time
// before the first sample falls back to that first sample; beyond the last
// sample the row stays frozen at it.
inline std::vector<double> covariate_row(const std::vector<CovariateSample>& path,
                                         int n_covariates, int market, double t) {
  std::vector<double> row(static_cast<std::size_t>(n_covariates) + 1, 0.0);
  row[0] = 1.0;
  if (path.empty()) {
    if (n_covariates > 0)
      throw std::runtime_error("market " + std::to_string(market) + " has no covariate samples");
    return row;
  }
  const CovariateSample* last = &path.front();
  for (const auto& s : path) {
    if (s.time <= t + 1e-12)
      last = &s;
    else
      break;
  }
  for (int c = 0; c < n_covariates; ++c)
    row[static_cast<std::size_t>(c) + 1] = last->values[static_cast<std::size_t>(c)];
  return row;
}

inline std::vector<double> covariate_row(const FirmPanel& panel, int market, double t) {
  return covariate_row(panel.covariates[static_cast<std::size_t>(market)], panel.n_covariates,
                       market, t);
}

// ---------------------------------------------------------------------------
// Candidate neighborhood network. Links are directed agent-to-agent edges
// (firm, market) -> (peer_firm, peer_market); a market never links to itself.

struct MarketLink {
  int firm = 0;
  int market = 0;
  int peer_firm = 0;
  int peer_market = 0;
  auto operator<=>(const MarketLink&) const = default;
};

struct ConsiderationNetwork {
  int n_firms = 0;
  int n_markets = 0;
  std::vector<MarketLink> links;  // sorted, unique

  bool has(int f, int m, int pf, int pm) const {
    return std::binary_search(links.begin(), links.end(), MarketLink{f, m, pf, pm});
  }
};

inline void sort_links(ConsiderationNetwork& net) {
  std::sort(net.links.begin(), net.links.end());
  net.links.erase(std::unique(net.links.begin(), net.links.end()), net.links.end());
}

inline ConsiderationNetwork without_links(const ConsiderationNetwork& net,
                                          const std::vector<MarketLink>& drop) {
  ConsiderationNetwork out = net;
  for (const auto& link : drop) {
    auto it = std::lower_bound(out.links.begin(), out.links.end(), link);
    if (it != out.links.end() && *it == link) out.links.erase(it);
  }
  return out;
}

// adj[f][m][pf] lists peer markets in ascending order.
using LinkAdjacency = std::vector<std::vector<std::vector<std::vector<int>>>>;

inline LinkAdjacency link_adjacency(const ConsiderationNetwork& net) {
  LinkAdjacency adj(static_cast<std::size_t>(net.n_firms));
  for (auto& per_market : adj)
    per_market.assign(static_cast<std::size_t>(net.n_markets),
                      std::vector<std::vector<int>>(static_cast<std::size_t>(net.n_firms)));
  for (const auto& link : net.links) {
    if (link.firm < 0 || link.firm >= net.n_firms || link.market < 0 ||
        link.market >= net.n_markets || link.peer_firm < 0 || link.peer_firm >= net.n_firms ||
        link.peer_market < 0 || link.peer_market >= net.n_markets)
      throw std::invalid_argument("network link outside the declared dimensions");
    adj[static_cast<std::size_t>(link.firm)][static_cast<std::size_t>(link.market)]
       [static_cast<std::size_t>(link.peer_firm)]
           .push_back(link.peer_market);
  }
  return adj;
}

inline double great_circle_km(double lat1, double lon1, double lat2, double lon2) {
  const double rad = std::numbers::pi / 180.0;
  const double dlat = (lat2 - lat1) * rad;
  const double dlon = (lon2 - lon1) * rad;
  const double a = std::sin(dlat / 2) * std::sin(dlat / 2) +
                   std::cos(lat1 * rad) * std::cos(lat2 * rad) * std::sin(dlon / 2) *
                       std::sin(dlon / 2);
  return 2.0 * 6371.0088 * std::asin(std::min(1.0, std::sqrt(a)));
}

// A market's neighbors: same province, or a shared border, or one of the k
// nearest by great-circle distance. The nearest relation is directional, so
// the neighbor sets need not be symmetric.
inline std::vector<std::vector<int>> market_neighbors(const MarketGeography& geo, int k_nearest) {
  const int n = geo.n_markets();
  std::vector<std::set<int>> neigh(static_cast<std::size_t>(n));
  for (int m = 0; m < n; ++m)
    for (int m2 = 0; m2 < n; ++m2)
      if (m2 != m && geo.province[static_cast<std::size_t>(m)] ==
                         geo.province[static_cast<std::size_t>(m2)])
        neigh[static_cast<std::size_t>(m)].insert(m2);
  for (const auto& [a, b] : geo.borders) {
    if (a < 0 || a >= n || b < 0 || b >= n)
      throw std::invalid_argument("border pair outside the market range");
    neigh[static_cast<std::size_t>(a)].insert(b);
    neigh[static_cast<std::size_t>(b)].insert(a);
  }
  for (int m = 0; m < n; ++m) {
    std::vector<std::pair<double, int>> by_distance;
    for (int m2 = 0; m2 < n; ++m2)
      if (m2 != m)
        by_distance.emplace_back(
            great_circle_km(geo.latitude[static_cast<std::size_t>(m)],
                            geo.longitude[static_cast<std::size_t>(m)],
                            geo.latitude[static_cast<std::size_t>(m2)],
                            geo.longitude[static_cast<std::size_t>(m2)]),
            m2);
    std::sort(by_distance.begin(), by_distance.end());
    const int take = std::min<int>(k_nearest, static_cast<int>(by_distance.size()));
    for (int i = 0; i < take; ++i)
      neigh[static_cast<std::size_t>(m)].insert(by_distance[static_cast<std::size_t>(i)].second);
  }
  std::vector<std::vector<int>> out(static_cast<std::size_t>(n));
  for (int m = 0; m < n; ++m)
    out[static_cast<std::size_t>(m)].assign(neigh[static_cast<std::size_t>(m)].begin(),
                                            neigh[static_cast<std::size_t>(m)].end());
  return out;
}

// Full candidate network: every firm in every neighboring market, own firm
// included.
inline ConsiderationNetwork build_neighborhood_network(const MarketGeography& geo, int n_firms,
                                                       int k_nearest = 5) {
  if (n_firms < 1) throw std::invalid_argument("need at least one firm");
  const auto neigh = market_neighbors(geo, k_nearest);
  ConsiderationNetwork net;
  net.n_firms = n_firms;
  net.n_markets = geo.n_markets();
  for (int f = 0; f < n_firms; ++f)
    for (int m = 0; m < net.n_markets; ++m)
      for (int pf = 0; pf < n_firms; ++pf)
        for (int pm : neigh[static_cast<std::size_t>(m)])
          net.links.push_back(MarketLink{f, m, pf, pm});
  sort_links(net);
  return net;
}

// ---------------------------------------------------------------------------
// Parameter layout. One contiguous block per firm: attention covariate
// coefficients, then per-peer-firm focal-market level and square terms, then
// per-peer-firm neighborhood level and square terms, then the profit block
// (covariates, own level/square, competitor level/square). n_cov counts the
// intercept.

struct ThetaLayout {
  int n_firms = 0;
  int n_cov = 0;

  int per_firm() const { return 2 * n_cov + 4 * n_firms + 4; }
  int dim() const { return n_firms * per_firm(); }

  int att_beta(int f, int c) const { return f * per_firm() + c; }
  int att_local(int f, int pf) const { return f * per_firm() + n_cov + pf; }
  int att_local_sq(int f, int pf) const { return f * per_firm() + n_cov + n_firms + pf; }
  int att_spill(int f, int pf) const { return f * per_firm() + n_cov + 2 * n_firms + pf; }
  int att_spill_sq(int f, int pf) const { return f * per_firm() + n_cov + 3 * n_firms + pf; }
  int pro_beta(int f, int c) const { return f * per_firm() + n_cov + 4 * n_firms + c; }
  int pro_own(int f) const { return f * per_firm() + 2 * n_cov + 4 * n_firms; }
  int pro_own_sq(int f) const { return pro_own(f) + 1; }
  int pro_comp(int f) const { return pro_own(f) + 2; }
  int pro_comp_sq(int f) const { return pro_own(f) + 3; }
};

inline ThetaLayout layout_for(const FirmPanel& panel) {
  return ThetaLayout{panel.n_firms, panel.n_covariates + 1};
}

inline std::vector<std::string> theta_names(const ThetaLayout& layout,
                                            const std::vector<std::string>& firm_names,
                                            const std::vector<std::string>& covariate_names) {
  std::vector<std::string> names(static_cast<std::size_t>(layout.dim()));
  auto cov_name = [&](int c) {
    return c == 0 ? std::string("intercept") : covariate_names[static_cast<std::size_t>(c - 1)];
  };
  for (int f = 0; f < layout.n_firms; ++f) {
    const std::string& fn = firm_names[static_cast<std::size_t>(f)];
    for (int c = 0; c < layout.n_cov; ++c) {
      names[static_cast<std::size_t>(layout.att_beta(f, c))] = fn + ".attention.beta." + cov_name(c);
      names[static_cast<std::size_t>(layout.pro_beta(f, c))] = fn + ".profit.beta." + cov_name(c);
    }
    for (int pf = 0; pf < layout.n_firms; ++pf) {
      const std::string& pn = firm_names[static_cast<std::size_t>(pf)];
      names[static_cast<std::size_t>(layout.att_local(f, pf))] = fn + ".attention.local." + pn;
      names[static_cast<std::size_t>(layout.att_local_sq(f, pf))] = fn + ".attention.local_sq." + pn;
      names[static_cast<std::size_t>(layout.att_spill(f, pf))] = fn + ".attention.spill." + pn;
      names[static_cast<std::size_t>(layout.att_spill_sq(f, pf))] = fn + ".attention.spill_sq." + pn;
    }
    names[static_cast<std::size_t>(layout.pro_own(f))] = fn + ".profit.own";
    names[static_cast<std::size_t>(layout.pro_own_sq(f))] = fn + ".profit.own_sq";
    names[static_cast<std::size_t>(layout.pro_comp(f))] = fn + ".profit.comp";
    names[static_cast<std::size_t>(layout.pro_comp_sq(f))] = fn + ".profit.comp_sq";
  }
  return names;
}

// ---------------------------------------------------------------------------
// Indices and opening probability.

inline double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

struct AgentFeatures {
  std::vector<double> local_log;  // per peer firm, log(1 + focal-market count)
  std::vector<double> spill_log;  // per peer firm, log(1 + summed neighborhood count)
  double own_log = 0.0;
  double comp_log = 0.0;
};

inline void agent_features(const LinkAdjacency& adj, const std::vector<std::vector<int>>& counts,
                           int f, int m, AgentFeatures& out) {
  const int n_firms = static_cast<int>(counts.size());
  out.local_log.resize(static_cast<std::size_t>(n_firms));
  out.spill_log.resize(static_cast<std::size_t>(n_firms));
  long long comp = 0;
  for (int pf = 0; pf < n_firms; ++pf) {
    const int local = counts[static_cast<std::size_t>(pf)][static_cast<std::size_t>(m)];
    out.local_log[static_cast<std::size_t>(pf)] = std::log1p(static_cast<double>(local));
    long long spill = 0;
    for (int pm : adj[static_cast<std::size_t>(f)][static_cast<std::size_t>(m)]
                     [static_cast<std::size_t>(pf)])
      spill += counts[static_cast<std::size_t>(pf)][static_cast<std::size_t>(pm)];
    out.spill_log[static_cast<std::size_t>(pf)] = std::log1p(static_cast<double>(spill));
    if (pf != f) comp += local;
  }
  out.own_log = out.local_log[static_cast<std::size_t>(f)];
  out.comp_log = std::log1p(static_cast<double>(comp));
}

inline double attention_index(const Eigen::VectorXd& theta, const ThetaLayout& layout,
                              const AgentFeatures& ft, const std::vector<double>& cov, int f) {
  double x = 0.0;
  for (int c = 0; c < layout.n_cov; ++c)
    x += theta[layout.att_beta(f, c)] * cov[static_cast<std::size_t>(c)];
  for (int pf = 0; pf < layout.n_firms; ++pf) {
    const double ll = ft.local_log[static_cast<std::size_t>(pf)];
    const double sl = ft.spill_log[static_cast<std::size_t>(pf)];
    x += theta[layout.att_local(f, pf)] * ll + theta[layout.att_local_sq(f, pf)] * ll * ll;
    x += theta[layout.att_spill(f, pf)] * sl + theta[layout.att_spill_sq(f, pf)] * sl * sl;
  }
  return x;
}

inline double profit_index(const Eigen::VectorXd& theta, const ThetaLayout& layout,
                           const AgentFeatures& ft, const std::vector<double>& cov, int f) {
  double x = 0.0;
  for (int c = 0; c < layout.n_cov; ++c)
    x += theta[layout.pro_beta(f, c)] * cov[static_cast<std::size_t>(c)];
  x += theta[layout.pro_own(f)] * ft.own_log + theta[layout.pro_own_sq(f)] * ft.own_log * ft.own_log;
  x += theta[layout.pro_comp(f)] * ft.comp_log +
       theta[layout.pro_comp_sq(f)] * ft.comp_log * ft.comp_log;
  return x;
}

// Bound view of one parameter vector over one network, for simulators and
// probability queries outside the likelihood loop.
class OpeningModel {
 public:
  OpeningModel(const ConsiderationNetwork& net, ThetaLayout layout, Eigen::VectorXd theta,
               bool full_consideration = false)
      : layout_(layout),
        theta_(std::move(theta)),
        adj_(link_adjacency(net)),
        full_consideration_(full_consideration) {
    if (theta_.size() != layout_.dim())
      throw std::invalid_argument("theta length does not match the layout");
    if (net.n_firms != layout.n_firms)
      throw std::invalid_argument("network and layout disagree on the firm count");
  }

  double attention(const std::vector<std::vector<int>>& counts, const std::vector<double>& cov,
                   int f, int m) const {
    agent_features(adj_, counts, f, m, scratch_);
    return attention_index(theta_, layout_, scratch_, cov, f);
  }

  double profit(const std::vector<std::vector<int>>& counts, const std::vector<double>& cov,
                int f, int m) const {
    agent_features(adj_, counts, f, m, scratch_);
    return profit_index(theta_, layout_, scratch_, cov, f);
  }

  double opening_prob(const std::vector<std::vector<int>>& counts, const std::vector<double>& cov,
                      int f, int m) const {
    agent_features(adj_, counts, f, m, scratch_);
    const double p_profit = logistic(profit_index(theta_, layout_, scratch_, cov, f));
    if (full_consideration_) return p_profit;
    return logistic(attention_index(theta_, layout_, scratch_, cov, f)) * p_profit;
  }

  const ThetaLayout& layout() const { return layout_; }
  const Eigen::VectorXd& theta() const { return theta_; }
  bool full_consideration() const { return full_consideration_; }

 private:
  ThetaLayout layout_;
  Eigen::VectorXd theta_;
  LinkAdjacency adj_;
  bool full_consideration_;
  mutable AgentFeatures scratch_;
};

// ---------------------------------------------------------------------------
// Log likelihood. Event k at time t_k with gap d_k to the previous event (the
// panel start before the first) contributes
//   -d_k * (1 - prod_a (1 - p_a)) + log p(opening pattern at t_k),
// everything evaluated at the state prevailing just before t_k. The daily
// decision rate is normalized to one, so time is measured in days.

// Fixed-shape pairwise reduction; the result does not depend on how callers
// might chunk the terms.
inline double pairwise_sum(std::vector<double>& terms) {
  if (terms.empty()) return 0.0;
  std::size_t n = terms.size();
  while (n > 1) {
    std::size_t h = 0;
    for (std::size_t i = 0; i + 1 < n; i += 2) terms[h++] = terms[i] + terms[i + 1];
    if (n % 2) terms[h++] = terms[n - 1];
    n = h;
  }
  return terms[0];
}

struct LikelihoodOptions {
  bool full_consideration = false;
  bool with_gradient = true;
};

struct LikelihoodResult {
  double value = 0.0;
  Eigen::VectorXd gradient;
  int n_events = 0;
  bool degenerate = false;  // no events: the objective is identically zero
};

inline LikelihoodResult log_likelihood(const FirmPanel& panel, const ConsiderationNetwork& net,
                                       const Eigen::VectorXd& theta,
                                       const LikelihoodOptions& opt = {}) {
  const ThetaLayout layout = layout_for(panel);
  if (theta.size() != layout.dim())
    throw std::invalid_argument("theta has length " + std::to_string(theta.size()) +
                                ", layout needs " + std::to_string(layout.dim()));
  if (net.n_firms != panel.n_firms || net.n_markets != panel.n_markets)
    throw std::invalid_argument("network dimensions do not match the panel");
  const LinkAdjacency adj = link_adjacency(net);

  LikelihoodResult res;
  res.n_events = static_cast<int>(panel.events.size());
  if (opt.with_gradient) res.gradient = Eigen::VectorXd::Zero(layout.dim());
  if (panel.events.empty()) {
    res.degenerate = true;
    return res;
  }

  std::vector<std::vector<int>> counts = panel.initial_counts;
  const int A = panel.n_firms * panel.n_markets;
  struct AgentCell {
    AgentFeatures ft;
    double att = 0.0, pro = 0.0;
    double p_att = 1.0, p_pro = 0.0;
    double log1mp = 0.0;  // log(1 - p_att * p_pro)
  };
  std::vector<AgentCell> cells(static_cast<std::size_t>(A));
  std::vector<std::vector<double>> cov_rows(static_cast<std::size_t>(panel.n_markets));
  std::vector<double> terms;
  terms.reserve(panel.events.size());

  double prev_t = panel.start_time;
  for (const auto& ev : panel.events) {
    if (ev.time <= prev_t)
      throw std::runtime_error("event times must be strictly increasing");
    if (ev.firm < 0 || ev.firm >= panel.n_firms || ev.market < 0 || ev.market >= panel.n_markets)
      throw std::runtime_error("event outside the declared firm or market range");
    if (ev.increment < 1) throw std::runtime_error("event increment must be positive");
    const double gap = ev.time - prev_t;

    for (int m = 0; m < panel.n_markets; ++m)
      cov_rows[static_cast<std::size_t>(m)] = covariate_row(panel, m, ev.time);

    double log_p0 = 0.0;
    for (int f = 0; f < panel.n_firms; ++f)
      for (int m = 0; m < panel.n_markets; ++m) {
        AgentCell& cell = cells[static_cast<std::size_t>(f * panel.n_markets + m)];
        agent_features(adj, counts, f, m, cell.ft);
        const auto& cov = cov_rows[static_cast<std::size_t>(m)];
        cell.pro = profit_index(theta, layout, cell.ft, cov, f);
        cell.p_pro = logistic(cell.pro);
        double one_minus_p;
        if (opt.full_consideration) {
          cell.att = 0.0;
          cell.p_att = 1.0;
          one_minus_p = logistic(-cell.pro);
        } else {
          cell.att = attention_index(theta, layout, cell.ft, cov, f);
          cell.p_att = logistic(cell.att);
          const double qa = logistic(-cell.att);
          const double qb = logistic(-cell.pro);
          one_minus_p = qa + qb - qa * qb;
        }
        one_minus_p = std::max(one_minus_p, 1e-300);
        cell.log1mp = std::log(one_minus_p);
        log_p0 += cell.log1mp;
      }

    const double p0 = std::exp(log_p0);
    const double hazard = -std::expm1(log_p0);
    const int opener = ev.firm * panel.n_markets + ev.market;
    const AgentCell& oc = cells[static_cast<std::size_t>(opener)];
    double log_p_open = -softplus(-oc.pro);
    if (!opt.full_consideration) log_p_open -= softplus(-oc.att);
    terms.push_back(-gap * hazard + (log_p0 - oc.log1mp) + log_p_open);

    if (opt.with_gradient) {
      for (int f = 0; f < panel.n_firms; ++f)
        for (int m = 0; m < panel.n_markets; ++m) {
          const int a = f * panel.n_markets + m;
          const AgentCell& cell = cells[static_cast<std::size_t>(a)];
          const double qa = 1.0 - cell.p_att;
          const double qb = 1.0 - cell.p_pro;
          const double dpa = cell.p_att * qa * cell.p_pro;   // d p / d attention index
          const double dpb = cell.p_att * cell.p_pro * qb;   // d p / d profit index
          // prod over the other agents of (1 - p), kept in log space
          const double rest = std::exp(log_p0 - cell.log1mp);
          double wa = -gap * dpa * rest;
          double wb = -gap * dpb * rest;
          const double inv1mp = std::exp(-cell.log1mp);
          if (a == opener) {
            wa += qa;
            wb += qb;
          } else {
            wa -= dpa * inv1mp;
            wb -= dpb * inv1mp;
          }
          const auto& cov = cov_rows[static_cast<std::size_t>(m)];
          if (!opt.full_consideration && wa != 0.0) {
            for (int c = 0; c < layout.n_cov; ++c)
              res.gradient[layout.att_beta(f, c)] += wa * cov[static_cast<std::size_t>(c)];
            for (int pf = 0; pf < layout.n_firms; ++pf) {
              const double ll = cell.ft.local_log[static_cast<std::size_t>(pf)];
              const double sl = cell.ft.spill_log[static_cast<std::size_t>(pf)];
              res.gradient[layout.att_local(f, pf)] += wa * ll;
              res.gradient[layout.att_local_sq(f, pf)] += wa * ll * ll;
              res.gradient[layout.att_spill(f, pf)] += wa * sl;
              res.gradient[layout.att_spill_sq(f, pf)] += wa * sl * sl;
            }
          }
          for (int c = 0; c < layout.n_cov; ++c)
            res.gradient[layout.pro_beta(f, c)] += wb * cov[static_cast<std::size_t>(c)];
          res.gradient[layout.pro_own(f)] += wb * cell.ft.own_log;
          res.gradient[layout.pro_own_sq(f)] += wb * cell.ft.own_log * cell.ft.own_log;
          res.gradient[layout.pro_comp(f)] += wb * cell.ft.comp_log;
          res.gradient[layout.pro_comp_sq(f)] += wb * cell.ft.comp_log * cell.ft.comp_log;
        }
    }

    counts[static_cast<std::size_t>(ev.firm)][static_cast<std::size_t>(ev.market)] += ev.increment;
    prev_t = ev.time;
  }

  res.value = pairwise_sum(terms);
  return res;
}

// ---------------------------------------------------------------------------
// Maximum likelihood. BFGS with Armijo backtracking on the negated objective;
// convergence when the gradient infinity norm falls below tolerance or the
// accepted step shrinks away. Non-convergence is reported, never thrown. The
// default two starts are the supplied point and one seeded perturbation of it.

struct MaximizeOptions {
  int max_iterations = 2000;
  double gradient_tol = 1e-6;
  double step_tol = 1e-10;
  int n_starts = 2;
  std::uint64_t start_seed = 7261;
  bool full_consideration = false;
};

struct MaximizeResult {
  Eigen::VectorXd theta;
  double value = -std::numeric_limits<double>::infinity();
  int iterations = 0;
  double gradient_norm = std::numeric_limits<double>::infinity();
  bool converged = false;
  bool degenerate = false;
};

namespace detail {

inline MaximizeResult maximize_from(const FirmPanel& panel, const ConsiderationNetwork& net,
                                    const Eigen::VectorXd& theta0, const MaximizeOptions& opt) {
  LikelihoodOptions lik;
  lik.full_consideration = opt.full_consideration;
  const int n = static_cast<int>(theta0.size());

  MaximizeResult res;
  res.theta = theta0;

  Eigen::VectorXd x = theta0;
  LikelihoodResult cur = log_likelihood(panel, net, x, lik);
  if (cur.degenerate) {
    res.degenerate = true;
    res.value = 0.0;
    return res;
  }
  double f = -cur.value;
  Eigen::VectorXd g = -cur.gradient;
  if (!std::isfinite(f)) {
    res.value = cur.value;
    res.gradient_norm = g.lpNorm<Eigen::Infinity>();
    return res;
  }

  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n);
  bool scaled = false;
  int it = 0;
  for (; it < opt.max_iterations; ++it) {
    const double ginf = g.lpNorm<Eigen::Infinity>();
    if (ginf < opt.gradient_tol) {
      res.converged = true;
      break;
    }
    Eigen::VectorXd d = -(H * g);
    double slope = g.dot(d);
    if (!(slope < 0.0)) {
      H.setIdentity();
      d = -g;
      slope = g.dot(d);
    }
    double step = 1.0;
    Eigen::VectorXd x_new;
    LikelihoodResult trial;
    double f_new = std::numeric_limits<double>::infinity();
    bool accepted = false;
    while (step * d.lpNorm<Eigen::Infinity>() >= opt.step_tol) {
      x_new = x + step * d;
      trial = log_likelihood(panel, net, x_new, lik);
      f_new = -trial.value;
      if (std::isfinite(f_new) && f_new <= f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;

    Eigen::VectorXd g_new = -trial.gradient;
    Eigen::VectorXd s = x_new - x;
    Eigen::VectorXd y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (!scaled) {
        H *= sy / y.squaredNorm();
        scaled = true;
      }
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
      H = (I - rho * s * y.transpose()) * H * (I - rho * y * s.transpose()) +
          rho * s * s.transpose();
    }
    x = std::move(x_new);
    f = f_new;
    g = std::move(g_new);
  }

  res.theta = x;
  res.value = -f;
  res.iterations = it;
  res.gradient_norm = g.lpNorm<Eigen::Infinity>();
  return res;
}

}  // namespace detail

inline MaximizeResult maximize_likelihood(const FirmPanel& panel, const ConsiderationNetwork& net,
                                          const Eigen::VectorXd& theta0,
                                          const MaximizeOptions& opt = {}) {
  const ThetaLayout layout = layout_for(panel);
  if (theta0.size() != layout.dim())
    throw std::invalid_argument("starting theta does not match the layout");
  MaximizeResult best;
  bool have = false;
  for (int s = 0; s < std::max(1, opt.n_starts); ++s) {
    Eigen::VectorXd start = theta0;
    if (s > 0) {
      RngStream rng(opt.start_seed + static_cast<std::uint64_t>(s));
      for (int i = 0; i < start.size(); ++i) start[i] += rng.uniform() - 0.5;
    }
    MaximizeResult run = detail::maximize_from(panel, net, start, opt);
    if (run.degenerate) return run;
    if (!have || run.value > best.value) {
      best = std::move(run);
      have = true;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Standard errors from the inverse negative Hessian. The Hessian is built by
// central differences of the analytic gradient with a relative step, then
// symmetrized; the asymmetry left behind measures differencing error. A
// curvature matrix that is not negative definite is reported, not thrown.

struct StandardErrorOptions {
  double relative_step = 1e-4;
  bool full_consideration = false;
};

struct StandardErrorResult {
  Eigen::MatrixXd hessian;     // symmetrized
  Eigen::MatrixXd covariance;  // empty unless -hessian is positive definite
  Eigen::VectorXd se;
  double max_asymmetry = 0.0;
  bool positive_definite = false;
  std::vector<double> offending_eigenvalues;  // non-positive spectrum of -hessian
};

inline StandardErrorResult standard_errors(const FirmPanel& panel,
                                           const ConsiderationNetwork& net,
                                           const Eigen::VectorXd& theta_hat,
                                           const StandardErrorOptions& opt = {}) {
  const int n = static_cast<int>(theta_hat.size());
  LikelihoodOptions lik;
  lik.full_consideration = opt.full_consideration;

  Eigen::MatrixXd raw(n, n);
  for (int i = 0; i < n; ++i) {
    const double h = opt.relative_step * std::max(1.0, std::abs(theta_hat[i]));
    Eigen::VectorXd up = theta_hat, dn = theta_hat;
    up[i] += h;
    dn[i] -= h;
    const Eigen::VectorXd gu = log_likelihood(panel, net, up, lik).gradient;
    const Eigen::VectorXd gd = log_likelihood(panel, net, dn, lik).gradient;
    raw.row(i) = ((gu - gd) / (2.0 * h)).transpose();
  }

  StandardErrorResult res;
  res.max_asymmetry = (raw - raw.transpose()).cwiseAbs().maxCoeff();
  res.hessian = 0.5 * (raw + raw.transpose());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(-res.hessian);
  const Eigen::VectorXd& ev = eig.eigenvalues();
  for (int i = 0; i < n; ++i)
    if (ev[i] <= 0.0) res.offending_eigenvalues.push_back(ev[i]);
  if (res.offending_eigenvalues.empty()) {
    res.positive_definite = true;
    res.covariance =
        eig.eigenvectors() * ev.cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
    res.se = res.covariance.diagonal().cwiseSqrt();
  }
  return res;
}

// ---------------------------------------------------------------------------
// Greedy link-deletion search. Start from the full candidate network; each
// round refits every single-deletion branch (warm-started at the incumbent
// estimate), applies the best strict improvement, and stops when none exists.
// Ties resolve to the lexicographically first link. Branches whose fit fails
// are recorded and skipped.

struct GreedySearchOptions {
  MaximizeOptions fit;    // incumbent fit; branches reuse it with one warm start
  bool tie_firms = false;  // delete (market, peer firm, peer market) jointly across firms
  // Seed every branch fit from the original theta0 instead of the incumbent.
  // Costs iterations but makes each subset's fitted value independent of the
  // deletion path, so search variants can be compared value for value.
  bool cold_branches = false;
  int max_rounds = 100000;
};

struct GreedyStep {
  int round = 0;
  std::vector<MarketLink> removed;
  double delta = 0.0;
  double value_after = 0.0;
};

struct GreedyBranchFailure {
  int round = 0;
  MarketLink link;
  std::string message;
};

struct GreedySearchResult {
  ConsiderationNetwork network;
  Eigen::VectorXd theta;
  double value = 0.0;
  std::vector<GreedyStep> trace;
  std::vector<GreedyBranchFailure> failures;
  bool degenerate = false;
};

namespace detail {

inline std::vector<std::vector<MarketLink>> deletion_moves(const ConsiderationNetwork& net,
                                                           bool tie_firms) {
  std::vector<std::vector<MarketLink>> moves;
  if (!tie_firms) {
    for (const auto& link : net.links) moves.push_back({link});
    return moves;
  }
  std::map<std::tuple<int, int, int>, std::vector<MarketLink>> groups;
  for (const auto& link : net.links)
    groups[{link.market, link.peer_firm, link.peer_market}].push_back(link);
  for (auto& [key, links] : groups) moves.push_back(std::move(links));
  return moves;
}

}  // namespace detail

inline GreedySearchResult greedy_network_search(const FirmPanel& panel,
                                                const ConsiderationNetwork& candidate,
                                                const Eigen::VectorXd& theta0,
                                                const GreedySearchOptions& opt = {}) {
  GreedySearchResult res;
  res.network = candidate;
  sort_links(res.network);

  MaximizeResult incumbent = maximize_likelihood(panel, res.network, theta0, opt.fit);
  if (incumbent.degenerate) {
    res.degenerate = true;
    res.theta = incumbent.theta;
    return res;
  }

  // Warm branches explore from the incumbent only; cold branches rerun the
  // caller's full start schedule so every subset gets the same treatment.
  MaximizeOptions branch_opt = opt.fit;
  if (!opt.cold_branches) branch_opt.n_starts = 1;

  for (int round = 1; round <= opt.max_rounds; ++round) {
    const auto moves = detail::deletion_moves(res.network, opt.tie_firms);
    double best_delta = 0.0;
    int best_move = -1;
    MaximizeResult best_fit;
    for (std::size_t i = 0; i < moves.size(); ++i) {
      const ConsiderationNetwork pruned = without_links(res.network, moves[i]);
      MaximizeResult branch;
      try {
        branch = maximize_likelihood(panel, pruned,
                                     opt.cold_branches ? theta0 : incumbent.theta, branch_opt);
      } catch (const std::exception& e) {
        res.failures.push_back({round, moves[i].front(), e.what()});
        continue;
      }
      if (!std::isfinite(branch.value)) {
        res.failures.push_back({round, moves[i].front(), "objective not finite"});
        continue;
      }
      const double delta = branch.value - incumbent.value;
      if (delta > best_delta) {
        best_delta = delta;
        best_move = static_cast<int>(i);
        best_fit = std::move(branch);
      }
    }
    if (best_move < 0) break;
    res.network = without_links(res.network, moves[static_cast<std::size_t>(best_move)]);
    incumbent = std::move(best_fit);
    res.trace.push_back(
        {round, moves[static_cast<std::size_t>(best_move)], best_delta, incumbent.value});
  }

  res.theta = incumbent.theta;
  res.value = incumbent.value;
  return res;
}

// ---------------------------------------------------------------------------
// CSV loading. Comma separated, UTF-8, mandatory header, ISO dates. Openings
// hold one row per store added; rows sharing a date, firm, and market merge
// into one event, and distinct same-day agent events are spread by a tiny
// offset in file order so event times stay strictly increasing.

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;  // row index 0 is file line 2
};

inline CsvTable read_csv_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  auto split = [](const std::string& text) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream stream(text);
    while (std::getline(stream, field, ',')) fields.push_back(field);
    if (!text.empty() && text.back() == ',') fields.emplace_back();
    return fields;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split(line);
    if (table.header.empty()) {
      table.header = std::move(fields);
      continue;
    }
    if (fields.size() != table.header.size())
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected " +
                               std::to_string(table.header.size()) + " fields, got " +
                               std::to_string(fields.size()));
    table.rows.push_back(std::move(fields));
  }
  if (table.header.empty()) throw std::runtime_error(path + ": missing header row");
  return table;
}

inline int csv_column(const CsvTable& table, const std::string& path, const std::string& name) {
  for (std::size_t i = 0; i < table.header.size(); ++i)
    if (table.header[i] == name) return static_cast<int>(i);
  throw std::runtime_error(path + ": missing column '" + name + "'");
}

struct PanelFiles {
  std::string openings;   // date, firm, market
  std::string markets;    // market, date, then covariate columns
  std::string geography;  // market, province, lat, lon; optional
  std::string borders;    // market_a, market_b; optional
};

inline constexpr double kSameDayOffset = 1e-6;

inline FirmPanel load_firm_panel(const PanelFiles& files) {
  const CsvTable openings = read_csv_table(files.openings);
  const CsvTable markets = read_csv_table(files.markets);
  const int o_date = csv_column(openings, files.openings, "date");
  const int o_firm = csv_column(openings, files.openings, "firm");
  const int o_market = csv_column(openings, files.openings, "market");
  const int m_market = csv_column(markets, files.markets, "market");
  const int m_date = csv_column(markets, files.markets, "date");

  FirmPanel panel;
  for (const auto& name : markets.header)
    if (name != "market" && name != "date") panel.covariate_names.push_back(name);
  panel.n_covariates = static_cast<int>(panel.covariate_names.size());

  std::set<std::string> firm_set, market_set;
  for (const auto& row : openings.rows) {
    firm_set.insert(row[static_cast<std::size_t>(o_firm)]);
    market_set.insert(row[static_cast<std::size_t>(o_market)]);
  }
  for (const auto& row : markets.rows) market_set.insert(row[static_cast<std::size_t>(m_market)]);

  CsvTable geo_table;
  if (!files.geography.empty()) {
    geo_table = read_csv_table(files.geography);
    const int g_market = csv_column(geo_table, files.geography, "market");
    for (const auto& row : geo_table.rows)
      market_set.insert(row[static_cast<std::size_t>(g_market)]);
  }

  panel.firm_names.assign(firm_set.begin(), firm_set.end());
  panel.market_names.assign(market_set.begin(), market_set.end());
  panel.n_firms = static_cast<int>(panel.firm_names.size());
  panel.n_markets = static_cast<int>(panel.market_names.size());
  std::map<std::string, int> firm_index, market_index;
  for (int f = 0; f < panel.n_firms; ++f) firm_index[panel.firm_names[static_cast<std::size_t>(f)]] = f;
  for (int m = 0; m < panel.n_markets; ++m)
    market_index[panel.market_names[static_cast<std::size_t>(m)]] = m;

  std::int64_t day0 = std::numeric_limits<std::int64_t>::max();
  std::vector<std::int64_t> opening_days(openings.rows.size());
  for (std::size_t i = 0; i < openings.rows.size(); ++i) {
    opening_days[i] = parse_iso_date(openings.rows[i][static_cast<std::size_t>(o_date)]);
    day0 = std::min(day0, opening_days[i]);
  }
  std::vector<std::int64_t> market_days(markets.rows.size());
  for (std::size_t i = 0; i < markets.rows.size(); ++i) {
    market_days[i] = parse_iso_date(markets.rows[i][static_cast<std::size_t>(m_date)]);
    day0 = std::min(day0, market_days[i]);
  }
  if (day0 == std::numeric_limits<std::int64_t>::max()) day0 = 0;
  // Dates are day-grained; the window opens one day before the earliest date
  // so an opening on that date keeps a positive gap.
  panel.start_time = -1.0;

  panel.initial_counts.assign(static_cast<std::size_t>(panel.n_firms),
                              std::vector<int>(static_cast<std::size_t>(panel.n_markets), 0));

  panel.covariates.assign(static_cast<std::size_t>(panel.n_markets), {});
  std::vector<std::size_t> order(markets.rows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return market_days[a] < market_days[b]; });
  for (std::size_t i : order) {
    const auto& row = markets.rows[i];
    CovariateSample sample;
    sample.time = static_cast<double>(market_days[i] - day0);
    for (const auto& name : panel.covariate_names) {
      const int col = csv_column(markets, files.markets, name);
      try {
        sample.values.push_back(std::stod(row[static_cast<std::size_t>(col)]));
      } catch (const std::exception&) {
        throw std::runtime_error(files.markets + ": row " + std::to_string(i + 2) +
                                 ": bad number '" + row[static_cast<std::size_t>(col)] + "'");
      }
    }
    panel.covariates[static_cast<std::size_t>(market_index[row[static_cast<std::size_t>(m_market)]])]
        .push_back(std::move(sample));
  }

  // Events grouped per day in file order; repeated (firm, market) rows within
  // a day merge into one increment.
  std::map<std::int64_t, std::vector<std::size_t>> rows_by_day;
  for (std::size_t i = 0; i < openings.rows.size(); ++i) rows_by_day[opening_days[i]].push_back(i);
  for (const auto& [day, row_ids] : rows_by_day) {
    std::map<std::pair<int, int>, std::size_t> event_of_agent;
    std::vector<FirmEvent> day_events;
    for (std::size_t i : row_ids) {
      const auto& row = openings.rows[i];
      const int f = firm_index[row[static_cast<std::size_t>(o_firm)]];
      const int m = market_index[row[static_cast<std::size_t>(o_market)]];
      auto [it, inserted] = event_of_agent.try_emplace({f, m}, day_events.size());
      if (inserted)
        day_events.push_back(FirmEvent{0.0, f, m, 1});
      else
        ++day_events[it->second].increment;
    }
    for (std::size_t j = 0; j < day_events.size(); ++j) {
      day_events[j].time = static_cast<double>(day - day0) + static_cast<double>(j) * kSameDayOffset;
      panel.events.push_back(day_events[j]);
    }
  }

  if (!files.geography.empty()) {
    const int g_market = csv_column(geo_table, files.geography, "market");
    const int g_prov = csv_column(geo_table, files.geography, "province");
    const int g_lat = csv_column(geo_table, files.geography, "lat");
    const int g_lon = csv_column(geo_table, files.geography, "lon");
    auto& geo = panel.geography;
    geo.province.assign(static_cast<std::size_t>(panel.n_markets), "");
    geo.latitude.assign(static_cast<std::size_t>(panel.n_markets), 0.0);
    geo.longitude.assign(static_cast<std::size_t>(panel.n_markets), 0.0);
    std::vector<bool> seen(static_cast<std::size_t>(panel.n_markets), false);
    for (std::size_t i = 0; i < geo_table.rows.size(); ++i) {
      const auto& row = geo_table.rows[i];
      const auto idx = static_cast<std::size_t>(market_index[row[static_cast<std::size_t>(g_market)]]);
      geo.province[idx] = row[static_cast<std::size_t>(g_prov)];
      try {
        geo.latitude[idx] = std::stod(row[static_cast<std::size_t>(g_lat)]);
        geo.longitude[idx] = std::stod(row[static_cast<std::size_t>(g_lon)]);
      } catch (const std::exception&) {
        throw std::runtime_error(files.geography + ": row " + std::to_string(i + 2) +
                                 ": bad coordinate");
      }
      seen[idx] = true;
    }
    for (int m = 0; m < panel.n_markets; ++m)
      if (!seen[static_cast<std::size_t>(m)])
        throw std::runtime_error(files.geography + ": market '" +
                                 panel.market_names[static_cast<std::size_t>(m)] +
                                 "' has no geography row");
    if (!files.borders.empty()) {
      const CsvTable borders = read_csv_table(files.borders);
      const int b_a = csv_column(borders, files.borders, "market_a");
      const int b_b = csv_column(borders, files.borders, "market_b");
      for (std::size_t i = 0; i < borders.rows.size(); ++i) {
        const auto& row = borders.rows[i];
        const auto ia = market_index.find(row[static_cast<std::size_t>(b_a)]);
        const auto ib = market_index.find(row[static_cast<std::size_t>(b_b)]);
        if (ia == market_index.end() || ib == market_index.end())
          throw std::runtime_error(files.borders + ": row " + std::to_string(i + 2) +
                                   ": unknown market");
        geo.borders.emplace_back(ia->second, ib->second);
      }
    }
  }

  return panel;
}

// ---------------------------------------------------------------------------
// Result serialization.

inline nlohmann::ordered_json theta_to_json(const ThetaLayout& layout,
                                            const Eigen::VectorXd& theta,
                                            const std::vector<std::string>& names,
                                            const Eigen::VectorXd* se = nullptr) {
  nlohmann::ordered_json coef, errs;
  for (int i = 0; i < layout.dim(); ++i) {
    coef[names[static_cast<std::size_t>(i)]] = theta[i];
    if (se != nullptr && se->size() == theta.size())
      errs[names[static_cast<std::size_t>(i)]] = (*se)[i];
  }
  nlohmann::ordered_json out;
  out["coefficients"] = std::move(coef);
  if (!errs.empty()) out["standard_errors"] = std::move(errs);
  return out;
}

inline nlohmann::ordered_json network_to_json(const ConsiderationNetwork& net,
                                              const std::vector<std::string>& firm_names,
                                              const std::vector<std::string>& market_names) {
  nlohmann::ordered_json out;
  out["firms"] = firm_names;
  out["markets"] = market_names;
  nlohmann::ordered_json links = nlohmann::ordered_json::array();
  for (const auto& link : net.links) {
    nlohmann::ordered_json j;
    j["firm"] = firm_names[static_cast<std::size_t>(link.firm)];
    j["market"] = market_names[static_cast<std::size_t>(link.market)];
    j["peer_firm"] = firm_names[static_cast<std::size_t>(link.peer_firm)];
    j["peer_market"] = market_names[static_cast<std::size_t>(link.peer_market)];
    links.push_back(std::move(j));
  }
  out["links"] = std::move(links);
  return out;
}

inline void write_search_trace(std::ostream& out, const GreedySearchResult& res,
                               const std::vector<std::string>& firm_names,
                               const std::vector<std::string>& market_names) {
  auto link_json = [&](const MarketLink& link) {
    nlohmann::ordered_json j;
    j["firm"] = firm_names[static_cast<std::size_t>(link.firm)];
    j["market"] = market_names[static_cast<std::size_t>(link.market)];
    j["peer_firm"] = firm_names[static_cast<std::size_t>(link.peer_firm)];
    j["peer_market"] = market_names[static_cast<std::size_t>(link.peer_market)];
    return j;
  };
  for (const auto& step : res.trace) {
    nlohmann::ordered_json j;
    j["type"] = "step";
    j["round"] = step.round;
    nlohmann::ordered_json removed = nlohmann::ordered_json::array();
    for (const auto& link : step.removed) removed.push_back(link_json(link));
    j["removed"] = std::move(removed);
    j["delta"] = step.delta;
    j["value_after"] = step.value_after;
    out << j.dump() << '\n';
  }
  for (const auto& fail : res.failures) {
    nlohmann::ordered_json j;
    j["type"] = "branch_failure";
    j["round"] = fail.round;
    j["link"] = link_json(fail.link);
    j["message"] = fail.message;
    out << j.dump() << '\n';
  }
}

}  // namespace peernet
