#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <random>

#include "doctest.h"
#include "rsmfg/fixtures.hpp"
#include "rsmfg/game_spec.hpp"
#include "support/random_spec.hpp"

using namespace rsmfg;
using testsupport::random_simplex;

TEST_CASE("toy fixtures validate cleanly") {
  CHECK(validate_spec(toy_a()).ok());
  CHECK(validate_spec(toy_b()).ok());
}

TEST_CASE("validation names broken rows") {
  GameSpec spec = toy_a();
  spec.transition_base[0] = 0.9;  // row (s0, a0) now sums to 0.9
  const ValidationReport report = validate_spec(spec);
  REQUIRE_FALSE(report.ok());
  bool named = false;
  for (const auto& issue : report.issues) {
    if (issue.message.find("(s0,a0)") != std::string::npos &&
        issue.message.find("0.9") != std::string::npos) {
      named = true;
    }
  }
  CHECK(named);
}

TEST_CASE("validation flags negative base cost") {
  GameSpec spec = toy_a();
  spec.cost_base[1] = -1.0;
  const ValidationReport report = validate_spec(spec);
  REQUIRE_FALSE(report.ok());
  bool found = false;
  for (const auto& issue : report.issues) {
    if (issue.message.find("cost_base") != std::string::npos) found = true;
  }
  CHECK(found);
}

TEST_CASE("validation flags negative coupled cost at a vertex") {
  GameSpec spec = toy_a();
  spec.cost_couple[1] = -0.5;  // m(s0,a0,delta_{s1}) = 0 - 0.5
  REQUIRE_FALSE(validate_spec(spec).ok());
}

TEST_CASE("eval_transition at a vertex returns that vertex kernel") {
  const GameSpec spec = toy_b();
  MeanField d;
  d.dist = {0.0, 1.0};
  const std::vector<double> row = eval_transition(spec, 0, 0, d);
  CHECK(row[0] == 0.8);
  CHECK(row[1] == 0.2);
}

TEST_CASE("eval_transition ignores d when coupling is disabled") {
  const GameSpec spec = toy_a();
  std::mt19937_64 rng(1);
  for (int i = 0; i < 20; ++i) {
    MeanField d;
    d.dist = random_simplex(rng, 2);
    const std::vector<double> row = eval_transition(spec, 1, 0, d);
    CHECK(row[0] == 1.0);
    CHECK(row[1] == 0.0);
  }
}

TEST_CASE("toy_a transitions go to the action's state for any d") {
  const GameSpec spec = toy_a();
  std::mt19937_64 rng(2);
  for (int i = 0; i < 50; ++i) {
    MeanField d;
    d.dist = random_simplex(rng, 2);
    for (std::size_t s = 0; s < 2; ++s) {
      for (std::size_t a = 0; a < 2; ++a) {
        const std::vector<double> row = eval_transition(spec, s, a, d);
        CHECK(row[a] == 1.0);
        CHECK(row[1 - a] == 0.0);
      }
    }
  }
}

TEST_CASE("eval_cost fixture arithmetic") {
  const GameSpec spec = toy_a();
  MeanField delta_s1{{0.0, 1.0}};
  CHECK(eval_cost(spec, 1, 0, delta_s1) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(eval_cost(spec, 1, 1, delta_s1) == doctest::Approx(1.5).epsilon(1e-15));
  MeanField uniform{{0.5, 0.5}};
  CHECK(eval_cost(spec, 0, 0, uniform) == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("eval_cost without coupling is the base cost") {
  GameSpec spec = toy_a();
  spec.cost_couple.clear();
  MeanField d{{0.3, 0.7}};
  CHECK(eval_cost(spec, 1, 1, d) == 1.0);
}

TEST_CASE("empirical_distribution counts") {
  const MeanField d = empirical_distribution({0, 0, 1}, 2);
  CHECK(d.dist[0] == 2.0 / 3.0);
  CHECK(d.dist[1] == 1.0 / 3.0);
  CHECK(empirical_distribution({0}, 2).dist[0] == 1.0);
  const MeanField all_one = empirical_distribution({1, 1, 1, 1}, 2);
  CHECK(all_one.dist[1] == 1.0);
  CHECK_THROWS_AS(empirical_distribution({}, 2), std::invalid_argument);
}

TEST_CASE("empirical_distribution of a concatenation matches combined counts") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::size_t> pick(0, 3);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<std::size_t> xs, ys;
    for (int i = 0; i < 7; ++i) xs.push_back(pick(rng));
    for (int i = 0; i < 11; ++i) ys.push_back(pick(rng));
    std::vector<std::size_t> both = xs;
    both.insert(both.end(), ys.begin(), ys.end());
    const MeanField d = empirical_distribution(both, 4);
    std::vector<std::size_t> counts(4, 0);
    for (std::size_t s : both) ++counts[s];
    for (std::size_t k = 0; k < 4; ++k) {
      CHECK(d.dist[k] == static_cast<double>(counts[k]) / 18.0);
    }
    double sum = 0.0;
    for (double v : d.dist) sum += v;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-15));
  }
}

TEST_CASE("lipschitz moduli") {
  GameSpec decoupled = toy_a();
  decoupled.cost_couple.clear();
  CHECK(lipschitz_moduli(decoupled) == std::pair<double, double>{0.0, 0.0});

  CHECK(lipschitz_moduli(toy_a()).second == 0.5);

  const auto [lq_b, lm_b] = lipschitz_moduli(toy_b());
  CHECK(lq_b == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(lm_b == 0.5);

  GameSpec degenerate = toy_b();
  // Make both vertex kernels identical.
  for (std::size_t i = 0; i < 8; ++i) {
    degenerate.transition_couple[8 + i] = degenerate.transition_couple[i];
  }
  CHECK(lipschitz_moduli(degenerate).first == 0.0);
}

TEST_CASE("realized rows stay on the simplex and costs stay bounded") {
  std::mt19937_64 rng(4);
  testsupport::SpecShape shape;
  shape.n_s = 3;
  shape.n_a = 2;
  shape.n_y = 2;
  shape.couple_q = true;
  shape.couple_m = true;
  const GameSpec spec = testsupport::random_spec(rng, shape);
  REQUIRE(validate_spec(spec).ok());
  const double sup = spec.cost_sup();
  const auto [lq, lm] = lipschitz_moduli(spec);
  (void)lq;
  for (int i = 0; i < 1000; ++i) {
    MeanField d{random_simplex(rng, 3)};
    MeanField d2{random_simplex(rng, 3)};
    for (std::size_t s = 0; s < 3; ++s) {
      for (std::size_t a = 0; a < 2; ++a) {
        const std::vector<double> row = eval_transition(spec, s, a, d);
        double sum = 0.0;
        for (double v : row) {
          CHECK(v >= 0.0);
          sum += v;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        const double c = eval_cost(spec, s, a, d);
        CHECK(c >= -1e-15);
        CHECK(c <= sup + 1e-12);
        const double c2 = eval_cost(spec, s, a, d2);
        CHECK(std::abs(c - c2) <= lm * l1_distance(d.dist, d2.dist) + 1e-12);
      }
    }
  }
}

TEST_CASE("cost_sup equals the max over vertices") {
  const GameSpec spec = toy_a();
  CHECK(spec.cost_sup() == 1.5);
  CHECK(spec.max_accumulated_cost() == 3.0);  // beta = 1, T = 1
}
