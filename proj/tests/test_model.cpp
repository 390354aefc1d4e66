#include <catch2/catch_amalgamated.hpp>

#include "fixtures.hpp"
#include "peernet/model.hpp"

using namespace peernet;
using Catch::Matchers::WithinAbs;

TEST_CASE("configuration indexing is a lexicographic bijection") {
  const int A = 3, Y = 2;
  const auto S = config_count(A, Y);
  REQUIRE(S == 27);
  REQUIRE(config_index(Config{0, 0, 0}, Y) == 0);
  REQUIRE(config_index(Config{0, 0, 1}, Y) == 1);
  REQUIRE(config_index(Config{1, 0, 0}, Y) == 9);  // agent 0 most significant
  for (std::int64_t s = 0; s < S; ++s)
    REQUIRE(config_index(config_from_index(s, A, Y), Y) == s);
}

TEST_CASE("state space size guards against overflow") {
  REQUIRE(config_count(4, 3) == 256);
  REQUIRE_THROWS(config_count(60, 9));
}

TEST_CASE("hand-computed choice probabilities") {
  const auto m = fixtures::h1_model();
  check_model_structure(m);
  const Config y{0, 1};

  SECTION("agent 0 with its peer at alternative 1") {
    REQUIRE_THAT(choice_prob(m, 0, 0, y), WithinAbs(0.288, 1e-12));
    REQUIRE_THAT(choice_prob(m, 0, 1, y), WithinAbs(0.576, 1e-12));
    REQUIRE_THAT(choice_prob(m, 0, 2, y), WithinAbs(0.136, 1e-12));
  }
  SECTION("isolated agent is configuration-invariant") {
    for (int y0 = 0; y0 <= 2; ++y0) {
      const Config z{y0, 0};
      REQUIRE_THAT(choice_prob(m, 1, 0, z), WithinAbs(0.2425, 1e-12));
      REQUIRE_THAT(choice_prob(m, 1, 1, z), WithinAbs(0.357, 1e-12));
      REQUIRE_THAT(choice_prob(m, 1, 2, z), WithinAbs(0.4005, 1e-12));
    }
  }
  SECTION("restricted binary menu") {
    const auto pc = peer_counts(m, 0, y);
    REQUIRE_THAT(restricted_choice_prob(m, 0, 1, pc, 0b011u), WithinAbs(0.64, 1e-12));
    REQUIRE_THAT(restricted_choice_prob(m, 0, 0, pc, 0b011u), WithinAbs(0.36, 1e-12));
  }
}

TEST_CASE("direct and factorized forms agree everywhere") {
  const auto m = fixtures::h1_model();
  for (std::int64_t s = 0; s < m.n_configs(); ++s) {
    const Config y = config_from_index(s, m.net.n_agents(), m.menu_max);
    for (int a = 0; a < 2; ++a)
      for (int v = 0; v <= 2; ++v)
        REQUIRE_THAT(choice_prob_factorized(m, a, v, y),
                     WithinAbs(choice_prob(m, a, v, y), 1e-12));
  }
}

TEST_CASE("choice probabilities form a distribution") {
  const auto m = fixtures::h1_model();
  for (std::int64_t s = 0; s < m.n_configs(); ++s) {
    const Config y = config_from_index(s, m.net.n_agents(), m.menu_max);
    for (int a = 0; a < 2; ++a) {
      const auto row = choice_prob_row(m, a, y);
      double total = 0.0;
      for (int v = 0; v <= 2; ++v) {
        REQUIRE(row[v] >= 0.0);
        REQUIRE_THAT(row[v], WithinAbs(choice_prob(m, a, v, y), 1e-12));
        total += row[v];
      }
      REQUIRE_THAT(total, WithinAbs(1.0, 1e-12));
    }
  }
}

TEST_CASE("consideration set probabilities sum to one") {
  const auto m = fixtures::h1_model();
  for (int n = 0; n <= 1; ++n) {
    const auto pc = peer_counts(m, 0, Config{0, n});
    double total = 0.0;
    for (std::uint32_t bits = 0; bits < 4u; ++bits)
      total += consideration_set_prob(m, 0, (bits << 1) | 1u, pc);
    REQUIRE_THAT(total, WithinAbs(1.0, 1e-12));
  }
}

TEST_CASE("default is always considered") {
  const auto m = fixtures::h1_model();
  const auto pc = peer_counts(m, 0, Config{0, 0});
  // Masks without the default bit carry zero probability.
  REQUIRE(consideration_set_prob(m, 0, 0b010u, pc) == 0.0);
  REQUIRE(consideration_set_prob(m, 0, 0b100u, pc) == 0.0);
}

TEST_CASE("structural validation rejects malformed models") {
  SECTION("row sum off") {
    auto m = fixtures::h1_model();
    m.r[0].rows[0b011u][{0}] = {0.3, 0.8};
    REQUIRE_THROWS(check_model_structure(m));
  }
  SECTION("unsorted peer list") {
    auto m = fixtures::h1_model();
    m.net.nc = {{1}, {1, 0}};
    REQUIRE_THROWS(check_model_structure(m));
  }
  SECTION("consideration probability out of range") {
    auto m = fixtures::h1_model();
    m.q[0][0][1] = 1.5;
    REQUIRE_THROWS(check_model_structure(m));
  }
  SECTION("lambda must be positive") {
    auto m = fixtures::h1_model();
    m.lambda[0] = 0.0;
    REQUIRE_THROWS(check_model_structure(m));
  }
  SECTION("count vector exceeding the preference group") {
    auto m = fixtures::h1_model();
    m.r[0].rows[0b011u][{2}] = {0.5, 0.5};
    REQUIRE_THROWS(check_model_structure(m));
  }
}

TEST_CASE("missing choice rows surface as errors only when reached") {
  auto m = fixtures::h1_model();
  m.r[0].rows[0b011u].erase(std::vector<int>{1});
  // The row for one peer at alternative 1 is gone: configurations that need
  // it throw, others still evaluate.
  REQUIRE_THROWS(choice_prob(m, 0, 1, Config{0, 1}));
  REQUIRE_NOTHROW(choice_prob(m, 0, 1, Config{0, 0}));
}
