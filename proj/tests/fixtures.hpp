#pragma once

// Shared hand-built fixtures. H1: two agents, three alternatives; agent 1 is
// a joint consideration-and-preference peer of agent 0, agent 1 is isolated.
// H3: three agents with agent 0's peer groups disjoint (1 consideration only,
// 2 preference only), built to satisfy every applicable assumption clause.
// Every frozen number in the suites was recomputed away from this codebase.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "peernet/model.hpp"
#include "peernet/rng.hpp"

namespace fixtures {

inline peernet::ModelSpec h1_model() {
  peernet::ModelSpec m;
  m.menu_max = 2;
  m.net.nc = {{1}, {}};
  m.net.nr = {{1}, {}};
  m.lambda = {1.0, 2.0};
  m.q = {
      {{0.5, 0.8}, {0.4, 0.6}},
      {{0.7}, {0.9}},
  };
  m.r.resize(2);
  auto& r0 = m.r[0].rows;
  r0[0b001][{}] = {1.0};
  r0[0b011][{0}] = {0.3, 0.7};
  r0[0b011][{1}] = {0.2, 0.8};
  r0[0b101][{0}] = {0.5, 0.5};
  r0[0b101][{1}] = {0.6, 0.4};
  r0[0b111][{0, 0}] = {0.2, 0.5, 0.3};
  r0[0b111][{1, 0}] = {0.1, 0.6, 0.3};
  r0[0b111][{0, 1}] = {0.25, 0.35, 0.4};
  auto& r1 = m.r[1].rows;
  r1[0b001][{}] = {1.0};
  r1[0b011][{0}] = {0.4, 0.6};
  r1[0b101][{0}] = {0.45, 0.55};
  r1[0b111][{0, 0}] = {0.1, 0.5, 0.4};
  return m;
}

inline peernet::ModelSpec h3_disjoint() {
  peernet::ModelSpec m;
  m.menu_max = 2;
  m.net.nc = {{1}, {}, {}};
  m.net.nr = {{2}, {}, {}};
  m.lambda = {1.0, 2.0, 1.5};
  m.q = {
      {{0.5, 0.8}, {0.4, 0.6}},
      {{0.7}, {0.9}},
      {{0.7}, {0.9}},
  };
  m.r.resize(3);
  auto& r0 = m.r[0].rows;
  r0[0b001][{}] = {1.0};
  r0[0b011][{0}] = {0.3, 0.7};
  r0[0b011][{1}] = {0.2, 0.8};
  r0[0b101][{0}] = {0.5, 0.5};
  r0[0b101][{1}] = {0.4, 0.6};
  r0[0b111][{0, 0}] = {0.2, 0.5, 0.3};
  r0[0b111][{1, 0}] = {0.1, 0.6, 0.3};
  r0[0b111][{0, 1}] = {0.15, 0.45, 0.4};
  for (int a : {1, 2}) {
    auto& ra = m.r[a].rows;
    ra[0b001][{}] = {1.0};
    ra[0b011][{0}] = {0.4, 0.6};
    ra[0b101][{0}] = {0.45, 0.55};
    ra[0b111][{0, 0}] = {0.1, 0.5, 0.4};
  }
  return m;
}

// Random generator drawn directly on the single-switch sparsity pattern.
// Rate matrices built from a choice model concentrate spectrum: the switching
// agent's choice probabilities ignore its own position, which forces an
// eigenvalue at minus the total alarm rate with high multiplicity, and the
// principal-branch recovery rightly refuses such inputs. Independent random
// rates on the same pattern have a generically simple spectrum; draws are
// rejected until the eigenvalue gap clears a safety margin.
inline Eigen::MatrixXd random_pattern_generator(int n_agents, int menu_max,
                                                std::uint64_t seed) {
  const std::int64_t S = peernet::config_count(n_agents, menu_max);
  for (int attempt = 0; attempt < 64; ++attempt) {
    peernet::RngStream rng(seed + 0x9e3779b97f4a7c15ull * attempt);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(S, S);
    for (std::int64_t s = 0; s < S; ++s) {
      const peernet::Config y = peernet::config_from_index(s, n_agents, menu_max);
      for (int a = 0; a < n_agents; ++a)
        for (int v = 0; v <= menu_max; ++v) {
          if (v == y[a]) continue;
          peernet::Config to = y;
          to[a] = v;
          m(s, peernet::config_index(to, menu_max)) = 0.1 + 1.1 * rng.uniform();
        }
      m(s, s) = -m.row(s).sum();
    }
    const Eigen::VectorXcd ev = Eigen::EigenSolver<Eigen::MatrixXd>(m).eigenvalues();
    double scale = 0.0;
    double gap = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < S; ++i) scale = std::max(scale, std::abs(ev(i)));
    for (Eigen::Index i = 0; i < S; ++i)
      for (Eigen::Index j = i + 1; j < S; ++j)
        gap = std::min(gap, std::abs(ev(i) - ev(j)));
    if (gap > 1e-3 * scale) return m;
  }
  throw std::runtime_error("random_pattern_generator: no simple-spectrum draw found");
}

}  // namespace fixtures
