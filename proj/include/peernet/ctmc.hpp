#pragma once

// Continuous-time dynamics on the space of joint configurations.
//
// The chain moves by single-agent revisions: agent a wakes at Poisson rate
// lambda_a and redraws a choice from P_a(.|y). Off-diagonal rates therefore
// vanish whenever two configurations differ in more than one coordinate, and
// each row's diagonal closes the row to zero. States are indexed
// lexicographically (agent 0 most significant digit, base Y+1).

#include <Eigen/Dense>
#include <Eigen/LU>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "peernet/model.hpp"
#include "peernet/rng.hpp"

namespace peernet {

constexpr std::int64_t kDefaultStateCap = std::int64_t{1} << 20;

struct RateMatrix {
  int n_agents = 0;
  int menu_max = 0;
  Eigen::MatrixXd m;  // row = origin state, column = destination state
};

inline RateMatrix build_rate_matrix(const ModelSpec& model,
                                    std::int64_t state_cap = kDefaultStateCap) {
  check_model_structure(model);
  const std::int64_t S = model.n_configs();
  require(S <= state_cap, "build_rate_matrix: state space exceeds the cap (" +
                              std::to_string(S) + " > " + std::to_string(state_cap) + ")");
  const int A = model.n_agents();
  const int Y = model.menu_max;
  RateMatrix rm;
  rm.n_agents = A;
  rm.menu_max = Y;
  rm.m = Eigen::MatrixXd::Zero(S, S);
  for (std::int64_t s = 0; s < S; ++s) {
    const Config y = config_from_index(s, A, Y);
    for (int a = 0; a < A; ++a) {
      const auto row = choice_prob_row(model, a, y);
      for (int v = 0; v <= Y; ++v) {
        if (v == y[a]) continue;
        const std::int64_t d = config_index(switched(y, a, v), Y);
        rm.m(s, d) = model.lambda[a] * row[v];
      }
    }
    rm.m(s, s) = -rm.m.row(s).sum();
  }
  return rm;
}

// Stationary distribution: the left null vector of the generator, found by a
// rank-revealing LU of M^T; a power iteration on the uniformized kernel
// I + M/(2 max|diag|) is the fallback when the kernel is numerically unclear.
inline Eigen::VectorXd stationary_distribution(const RateMatrix& rm) {
  const auto S = rm.m.rows();
  require(S >= 1 && rm.m.cols() == S, "stationary_distribution: matrix must be square");
  Eigen::FullPivLU<Eigen::MatrixXd> lu(rm.m.transpose());
  lu.setThreshold(1e-12 * std::max(1.0, rm.m.cwiseAbs().maxCoeff()));
  Eigen::VectorXd mu;
  bool ok = false;
  if (lu.dimensionOfKernel() == 1) {
    mu = lu.kernel().col(0);
    const double total = mu.sum();
    if (std::abs(total) > 0.0) {
      mu /= total;
      ok = mu.minCoeff() > -1e-12;
    }
  }
  if (!ok) {
    const double c = 2.0 * std::max(1e-300, rm.m.diagonal().cwiseAbs().maxCoeff());
    const Eigen::MatrixXd t = Eigen::MatrixXd::Identity(S, S) + rm.m / c;
    Eigen::RowVectorXd x = Eigen::RowVectorXd::Constant(S, 1.0 / static_cast<double>(S));
    for (int it = 0; it < 200000; ++it) {
      Eigen::RowVectorXd next = x * t;
      next /= next.sum();
      const double step = (next - x).cwiseAbs().maxCoeff();
      x = next;
      if (step < 1e-15) break;
    }
    mu = x.transpose();
  }
  require_state(mu.minCoeff() > 0.0,
                "stationary_distribution: chain is not irreducible (nonpositive mass)");
  const double residual = (mu.transpose() * rm.m).cwiseAbs().maxCoeff();
  require_state(residual <= 1e-10,
                "stationary_distribution: residual " + std::to_string(residual) +
                    " exceeds tolerance");
  return mu;
}

// Interval transition matrix exp(delta * M).
inline Eigen::MatrixXd transition_matrix(const RateMatrix& rm, double delta) {
  require(delta >= 0.0, "transition_matrix: delta must be nonnegative");
  return (delta * rm.m).exp();
}

struct EventRecord {
  double time = 0.0;
  int agent = 0;
  int choice = 0;
};

struct EventLog {
  int n_agents = 0;
  int menu_max = 0;
  Config initial;
  double horizon = 0.0;
  std::uint64_t seed = 0;
  std::string model_hash;
  std::vector<EventRecord> events;  // every alarm ring, re-selections included
};

// Simulate one trajectory on [0, horizon]. A single stream drives all draws:
// waiting time, then the acting agent (inverse CDF over lambda in ascending
// agent order), then the new choice (inverse CDF over ascending alternative).
// Re-selections of the current choice are genuine events and are recorded.
inline EventLog simulate_trajectory(const ModelSpec& model, const Config& initial,
                                    double horizon, std::uint64_t seed) {
  check_model_structure(model);
  require(static_cast<int>(initial.size()) == model.n_agents(),
          "simulate_trajectory: initial configuration size mismatch");
  for (int c : initial)
    require(c >= 0 && c <= model.menu_max, "simulate_trajectory: initial entry outside menu");
  require(horizon > 0.0, "simulate_trajectory: horizon must be positive");

  const int A = model.n_agents();
  const int Y = model.menu_max;
  EventLog log;
  log.n_agents = A;
  log.menu_max = Y;
  log.initial = initial;
  log.horizon = horizon;
  log.seed = seed;

  double total_rate = 0.0;
  for (double l : model.lambda) total_rate += l;

  // CCP rows cached per visited state when the state space is indexable.
  const bool cache = model.n_configs() <= (std::int64_t{1} << 22);
  std::vector<std::vector<double>> row_cache;
  if (cache) row_cache.resize(static_cast<std::size_t>(model.n_configs()));

  RngStream rng(seed);
  Config y = initial;
  double t = 0.0;
  for (;;) {
    t += rng.exponential(total_rate);
    if (t > horizon) break;
    const int a = rng.categorical(model.lambda);
    const std::vector<double>* row;
    std::vector<double> scratch;
    if (cache) {
      const auto s = static_cast<std::size_t>(config_index(y, Y));
      auto& rows = row_cache[s];
      if (rows.empty()) {
        rows.reserve(static_cast<std::size_t>(A) * (Y + 1));
        for (int b = 0; b < A; ++b) {
          const auto r = choice_prob_row(model, b, y);
          rows.insert(rows.end(), r.begin(), r.end());
        }
      }
      scratch.assign(rows.begin() + static_cast<std::size_t>(a) * (Y + 1),
                     rows.begin() + static_cast<std::size_t>(a + 1) * (Y + 1));
      row = &scratch;
    } else {
      scratch = choice_prob_row(model, a, y);
      row = &scratch;
    }
    const int v = rng.categorical(*row);
    log.events.push_back({t, a, v});
    y[a] = v;
  }
  return log;
}

struct Panel {
  int n_agents = 0;
  int menu_max = 0;
  double delta = 0.0;
  std::vector<Config> states;  // right-continuous snapshots at 0, delta, 2 delta, ...
};

inline Panel sample_at_intervals(const EventLog& log, double delta) {
  require(delta > 0.0, "sample_at_intervals: delta must be positive");
  require(delta < log.horizon,
          "sample_at_intervals: delta must be below the horizon (need at least two epochs)");
  Panel panel;
  panel.n_agents = log.n_agents;
  panel.menu_max = log.menu_max;
  panel.delta = delta;
  const auto n_epochs = static_cast<std::int64_t>(std::floor(log.horizon / delta)) + 1;
  Config y = log.initial;
  std::size_t e = 0;
  for (std::int64_t k = 0; k < n_epochs; ++k) {
    const double t = static_cast<double>(k) * delta;
    while (e < log.events.size() && log.events[e].time <= t) {
      y[log.events[e].agent] = log.events[e].choice;
      ++e;
    }
    panel.states.push_back(y);
  }
  return panel;
}

}  // namespace peernet
