#pragma once

// Recovering primitives from observables.
//
// Dataset 1 (continuous records): alarm rates from epoch counts, CCPs from
// cell frequencies, or an exact read-off from the rate matrix.
// Dataset 2 (discrete panel): the interval transition matrix from snapshot
// frequencies, then the generator through the principal matrix logarithm with
// eigenvalue diagnostics; recovery is refused when the embedding conditions
// (distinct eigenvalues away from the branch cut) fail.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "peernet/ctmc.hpp"
#include "peernet/model.hpp"

namespace peernet {

// Conditional choice probabilities for every (agent, configuration, choice)
// cell, with per-row sample counts. A row count of kExactRow marks cells that
// are exact (model- or matrix-derived) rather than estimated; a count of zero
// marks unvisited rows whose probabilities are meaningless.
struct CcpTable {
  static constexpr int kExactRow = -1;

  int n_agents = 0;
  int menu_max = 0;
  std::vector<Eigen::MatrixXd> p;   // per agent: S x (Y+1)
  Eigen::MatrixXi row_count;        // A x S

  std::int64_t n_states() const { return config_count(n_agents, menu_max); }
  bool has(int a, std::int64_t s) const {
    const int c = row_count(a, s);
    return c == kExactRow || c > 0;
  }
  bool exact(int a, std::int64_t s) const { return row_count(a, s) == kExactRow; }
  double at(int a, std::int64_t s, int v) const {
    require(has(a, s), "ccp: cell never visited (agent " + std::to_string(a) + ", state " +
                           std::to_string(s) + ")");
    return p[a](s, v);
  }
  // Sampling variance of ln p(v|s) by the delta method; zero for exact cells.
  double log_var(int a, std::int64_t s, int v) const {
    if (exact(a, s)) return 0.0;
    const double n = static_cast<double>(row_count(a, s));
    const double prob = at(a, s, v);
    require_state(prob > 0.0, "ccp: log variance of a zero-frequency cell");
    return (1.0 - prob) / (n * prob);
  }
};

inline CcpTable exact_ccp_table(const ModelSpec& model,
                                std::int64_t state_cap = kDefaultStateCap) {
  check_model_structure(model);
  const std::int64_t S = model.n_configs();
  require(S <= state_cap, "exact_ccp_table: state space exceeds the cap");
  const int A = model.n_agents();
  const int Y = model.menu_max;
  CcpTable t;
  t.n_agents = A;
  t.menu_max = Y;
  t.p.assign(A, Eigen::MatrixXd::Zero(S, Y + 1));
  t.row_count = Eigen::MatrixXi::Constant(A, S, CcpTable::kExactRow);
  for (std::int64_t s = 0; s < S; ++s) {
    const Config y = config_from_index(s, A, Y);
    for (int a = 0; a < A; ++a) {
      const auto row = choice_prob_row(model, a, y);
      for (int v = 0; v <= Y; ++v) t.p[a](s, v) = row[v];
    }
  }
  return t;
}

struct EventRecoveryDiagnostics {
  std::int64_t n_events = 0;
  std::vector<std::int64_t> events_per_agent;
  std::int64_t visited_rows = 0;
  std::int64_t total_rows = 0;
};

struct EventRecovery {
  std::vector<double> lambda_hat;  // epochs per unit time, per agent
  CcpTable ccp;
  EventRecoveryDiagnostics diag;
};

// Frequency estimators from a continuous event record. Each event is an alarm
// of one agent; the conditioning configuration is the state just before the
// ring, so re-selections carry information about the diagonal of the CCP.
inline EventRecovery ccp_from_events(const EventLog& log,
                                     std::int64_t state_cap = kDefaultStateCap) {
  const int A = log.n_agents;
  const int Y = log.menu_max;
  require(A >= 1 && Y >= 1, "ccp_from_events: log carries no dimensions");
  require(log.horizon > 0.0, "ccp_from_events: nonpositive horizon");
  const std::int64_t S = config_count(A, Y);
  require(S <= state_cap, "ccp_from_events: state space exceeds the cap");

  EventRecovery out;
  out.lambda_hat.assign(A, 0.0);
  out.diag.events_per_agent.assign(A, 0);
  out.ccp.n_agents = A;
  out.ccp.menu_max = Y;
  out.ccp.p.assign(A, Eigen::MatrixXd::Zero(S, Y + 1));
  out.ccp.row_count = Eigen::MatrixXi::Zero(A, S);

  Config y = log.initial;
  double prev = 0.0;
  for (const auto& e : log.events) {
    require(e.time >= prev && e.time <= log.horizon, "ccp_from_events: event times out of order");
    prev = e.time;
    require(e.agent >= 0 && e.agent < A && e.choice >= 0 && e.choice <= Y,
            "ccp_from_events: event outside the model dimensions");
    const std::int64_t s = config_index(y, Y);
    out.ccp.row_count(e.agent, s) += 1;
    out.ccp.p[e.agent](s, e.choice) += 1.0;
    ++out.diag.events_per_agent[e.agent];
    y[e.agent] = e.choice;
  }
  out.diag.n_events = static_cast<std::int64_t>(log.events.size());
  for (int a = 0; a < A; ++a) {
    out.lambda_hat[a] = static_cast<double>(out.diag.events_per_agent[a]) / log.horizon;
    for (std::int64_t s = 0; s < S; ++s) {
      const int n = out.ccp.row_count(a, s);
      if (n > 0) out.ccp.p[a].row(s) /= static_cast<double>(n);
    }
  }
  out.diag.total_rows = static_cast<std::int64_t>(A) * S;
  out.diag.visited_rows = (out.ccp.row_count.array() > 0).count();
  return out;
}

struct RateDecomposition {
  std::vector<double> lambda;
  CcpTable ccp;
  double rate_residual = 0.0;  // worst cross-row disagreement of a recovered rate
};

// Split a structural rate matrix into alarm rates and CCPs. Each off-diagonal
// rate equals lambda_a P_a(v|y) and P_a(.|y) depends on y only through the
// peers of a, so rows sharing the others' sub-configuration y_{-a} expose the
// same rate vector; summing it over the full menu yields lambda_a. Cross-row
// disagreement beyond tolerance means the input is not a matrix of this model
// class, and is an error.
inline RateDecomposition decompose_rate_matrix(const RateMatrix& rm, double tol = 1e-8) {
  const int A = rm.n_agents;
  const int Y = rm.menu_max;
  require(A >= 1 && Y >= 1, "decompose_rate_matrix: dimensions missing");
  const std::int64_t S = config_count(A, Y);
  require(rm.m.rows() == S && rm.m.cols() == S,
          "decompose_rate_matrix: matrix size does not match (Y+1)^A");

  const double scale = std::max(1.0, rm.m.cwiseAbs().maxCoeff());
  for (std::int64_t s = 0; s < S; ++s) {
    const Config y = config_from_index(s, A, Y);
    for (std::int64_t d = 0; d < S; ++d) {
      if (d == s) continue;
      const double rate = rm.m(s, d);
      require(rate >= -1e-12 * scale, "decompose_rate_matrix: negative off-diagonal rate");
      if (diff_agents(y, config_from_index(d, A, Y)).size() > 1)
        require(std::abs(rate) <= tol * scale,
                "decompose_rate_matrix: nonzero rate between configurations differing in "
                "more than one coordinate");
    }
    require(std::abs(rm.m.row(s).sum()) <= 1e-8 * scale,
            "decompose_rate_matrix: row does not sum to zero");
  }

  RateDecomposition out;
  out.lambda.assign(A, 0.0);
  out.ccp.n_agents = A;
  out.ccp.menu_max = Y;
  out.ccp.p.assign(A, Eigen::MatrixXd::Zero(S, Y + 1));
  out.ccp.row_count = Eigen::MatrixXi::Constant(A, S, CcpTable::kExactRow);

  for (int a = 0; a < A; ++a) {
    double lambda_a = 0.0;
    bool lambda_set = false;
    // Enumerate the others' sub-configurations by walking all states whose
    // own coordinate is 0.
    for (std::int64_t s = 0; s < S; ++s) {
      Config y = config_from_index(s, A, Y);
      if (y[a] != 0) continue;
      // rate_to[v] = lambda_a P_a(v|y_{-a}), read off any row with own != v.
      std::vector<double> rate_to(Y + 1, 0.0);
      std::vector<bool> seen(Y + 1, false);
      for (int own = 0; own <= Y; ++own) {
        const Config yo = switched(y, a, own);
        const std::int64_t so = config_index(yo, Y);
        for (int v = 0; v <= Y; ++v) {
          if (v == own) continue;
          const double rate = rm.m(so, config_index(switched(yo, a, v), Y));
          if (!seen[v]) {
            rate_to[v] = rate;
            seen[v] = true;
          } else {
            const double dev = std::abs(rate - rate_to[v]);
            out.rate_residual = std::max(out.rate_residual, dev);
            require(dev <= tol * scale,
                    "decompose_rate_matrix: rate inconsistent across rows (residual " +
                        std::to_string(dev) + ")");
          }
        }
      }
      double lam = 0.0;
      for (int v = 0; v <= Y; ++v) lam += rate_to[v];
      if (!lambda_set) {
        lambda_a = lam;
        lambda_set = true;
      } else {
        const double dev = std::abs(lam - lambda_a);
        out.rate_residual = std::max(out.rate_residual, dev);
        require(dev <= tol * scale,
                "decompose_rate_matrix: lambda inconsistent across configurations (residual " +
                    std::to_string(dev) + ")");
      }
      require(lam > 0.0, "decompose_rate_matrix: nonpositive alarm rate recovered");
      for (int own = 0; own <= Y; ++own) {
        const std::int64_t so = config_index(switched(y, a, own), Y);
        for (int v = 0; v <= Y; ++v) out.ccp.p[a](so, v) = rate_to[v] / lam;
      }
    }
    out.lambda[a] = lambda_a;
  }
  return out;
}

struct TransitionEstimate {
  Eigen::MatrixXd p;            // row-normalized transition frequencies
  Eigen::VectorXi row_visits;   // origin-state visit counts; zero rows are flagged
  std::vector<std::int64_t> unvisited;
};

inline TransitionEstimate estimate_transition_matrix(const Panel& panel,
                                                     std::int64_t state_cap = kDefaultStateCap) {
  require(panel.states.size() >= 2, "estimate_transition_matrix: need at least two snapshots");
  const int A = panel.n_agents;
  const int Y = panel.menu_max;
  const std::int64_t S = config_count(A, Y);
  require(S <= state_cap, "estimate_transition_matrix: state space exceeds the cap");
  TransitionEstimate est;
  est.p = Eigen::MatrixXd::Zero(S, S);
  est.row_visits = Eigen::VectorXi::Zero(S);
  for (std::size_t k = 0; k + 1 < panel.states.size(); ++k) {
    const std::int64_t from = config_index(panel.states[k], Y);
    const std::int64_t to = config_index(panel.states[k + 1], Y);
    est.p(from, to) += 1.0;
    est.row_visits(from) += 1;
  }
  for (std::int64_t s = 0; s < S; ++s) {
    if (est.row_visits(s) > 0)
      est.p.row(s) /= static_cast<double>(est.row_visits(s));
    else
      est.unvisited.push_back(s);
  }
  return est;
}

struct GeneratorRecovery {
  bool ok = false;
  std::string reason;                  // set when recovery is refused
  Eigen::MatrixXd generator;           // valid only when ok
  Eigen::VectorXcd eigenvalues;        // of the transition matrix input
  double distinctness_margin = 0.0;    // min pairwise eigenvalue gap, relative
  double branch_cut_margin = 0.0;      // min angular distance from the negative real axis
  double imaginary_residual = 0.0;     // max |Im| of the reconstructed generator
  double off_pattern_norm = 0.0;       // largest entry removed by the pattern projection
  double negative_rate_clip = 0.0;     // largest in-pattern negative rate clipped to zero
  bool aliasing_suspected = false;
};

// Generator from an interval transition matrix: M = log(P)/delta through the
// principal branch of the eigendecomposition. The branch is trustworthy only
// when P's eigenvalues are simple and stay clear of the negative real axis;
// coincident eigenvalues are exactly what aliasing (generator eigenvalues
// differing by a multiple of 2 pi i / delta) produces, so recovery is refused
// rather than silently returning one of many compatible generators.
// When the configuration dimensions are supplied, entries off the
// single-switch sparsity pattern are projected to zero and the removed mass
// is reported.
inline GeneratorRecovery generator_from_panel(const Eigen::MatrixXd& p_hat, double delta,
                                              int n_agents = 0, int menu_max = 0) {
  require(delta > 0.0, "generator_from_panel: delta must be positive");
  const auto S = p_hat.rows();
  require(S >= 2 && p_hat.cols() == S, "generator_from_panel: matrix must be square");
  for (Eigen::Index i = 0; i < S; ++i) {
    require(std::abs(p_hat.row(i).sum() - 1.0) <= 1e-8,
            "generator_from_panel: rows must sum to one");
    require(p_hat.row(i).minCoeff() >= -1e-12, "generator_from_panel: negative entries");
  }

  GeneratorRecovery out;
  Eigen::EigenSolver<Eigen::MatrixXd> es(p_hat);
  require_state(es.info() == Eigen::Success, "generator_from_panel: eigendecomposition failed");
  out.eigenvalues = es.eigenvalues();

  double scale = 0.0;
  for (Eigen::Index i = 0; i < S; ++i) scale = std::max(scale, std::abs(out.eigenvalues(i)));
  double min_gap = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < S; ++i)
    for (Eigen::Index j = i + 1; j < S; ++j)
      min_gap = std::min(min_gap, std::abs(out.eigenvalues(i) - out.eigenvalues(j)));
  out.distinctness_margin = min_gap / std::max(scale, 1e-300);

  double min_angle = std::numeric_limits<double>::infinity();
  double min_mod = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < S; ++i) {
    const auto ev = out.eigenvalues(i);
    min_mod = std::min(min_mod, std::abs(ev));
    min_angle = std::min(min_angle, M_PI - std::abs(std::arg(ev)));
  }
  out.branch_cut_margin = min_angle;

  if (out.distinctness_margin < 1e-8) {
    out.aliasing_suspected = true;
    out.reason =
        "repeated eigenvalues of the transition matrix (relative margin " +
        std::to_string(out.distinctness_margin) +
        "); the principal logarithm is not trustworthy and generator eigenvalues "
        "differing by a multiple of 2 pi i / delta are indistinguishable";
    return out;
  }
  if (min_mod < 1e-12) {
    out.reason = "singular transition matrix: a zero eigenvalue has no logarithm";
    return out;
  }
  if (out.branch_cut_margin < 1e-8) {
    out.aliasing_suspected = true;
    out.reason =
        "eigenvalue on the negative real axis (branch-cut margin " +
        std::to_string(out.branch_cut_margin) + "); the principal branch is ambiguous";
    return out;
  }

  const Eigen::MatrixXcd v = es.eigenvectors();
  Eigen::VectorXcd logd(S);
  for (Eigen::Index i = 0; i < S; ++i) logd(i) = std::log(out.eigenvalues(i)) / delta;
  const Eigen::MatrixXcd mc = v * logd.asDiagonal() * v.inverse();
  out.imaginary_residual = mc.imag().cwiseAbs().maxCoeff();
  const double gen_scale = std::max(1.0, mc.real().cwiseAbs().maxCoeff());
  if (out.imaginary_residual > 1e-8 * gen_scale) {
    out.reason = "reconstructed generator is not real (imaginary residual " +
                 std::to_string(out.imaginary_residual) + ")";
    return out;
  }

  Eigen::MatrixXd g = mc.real();
  if (n_agents > 0 && menu_max > 0) {
    require(config_count(n_agents, menu_max) == S,
            "generator_from_panel: dimensions do not match the matrix size");
    for (Eigen::Index s = 0; s < S; ++s) {
      const Config y = config_from_index(s, n_agents, menu_max);
      for (Eigen::Index d = 0; d < S; ++d) {
        if (d == s) continue;
        if (diff_agents(y, config_from_index(d, n_agents, menu_max)).size() > 1) {
          out.off_pattern_norm = std::max(out.off_pattern_norm, std::abs(g(s, d)));
          g(s, d) = 0.0;
        } else if (g(s, d) < 0.0) {
          out.negative_rate_clip = std::max(out.negative_rate_clip, -g(s, d));
          g(s, d) = 0.0;
        }
      }
    }
    for (Eigen::Index s = 0; s < S; ++s) {
      g(s, s) = 0.0;
      g(s, s) = -g.row(s).sum();
    }
  }
  out.generator = g;
  out.ok = true;
  return out;
}

}  // namespace peernet
