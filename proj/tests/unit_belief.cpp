#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <map>
#include <random>

#include "doctest.h"
#include "rsmfg/belief.hpp"
#include "rsmfg/errors.hpp"
#include "rsmfg/fixtures.hpp"
#include "support/oracles.hpp"
#include "support/random_spec.hpp"

using namespace rsmfg;

namespace {

MeasureFlow delta_s0_flow(const GameSpec& spec) {
  MeasureFlow flow;
  flow.stages.assign(spec.horizon_T + 2, {FlowAtom{0, 0.0, 1.0}});
  return flow;
}

Belief random_belief(std::mt19937_64& rng, const AugmentedGame& aug,
                     std::size_t t) {
  const std::vector<double> weights =
      testsupport::random_simplex(rng, aug.num_aug_states(t));
  Belief z;
  z.stage = t;
  for (std::size_t id = 0; id < weights.size(); ++id) {
    z.entries.emplace_back(id, weights[id]);
  }
  return z;
}

}  // namespace

TEST_CASE("initial beliefs: Dirac prior with perfect observations") {
  const GameSpec spec = toy_a();
  const AugmentedGame aug = build_augmented(spec, delta_s0_flow(spec));
  const auto inits = initial_beliefs(aug);
  REQUIRE(inits.size() == 1);
  CHECK(inits[0].observation == 0);
  CHECK(inits[0].probability == 1.0);
  REQUIRE(inits[0].belief.entries.size() == 1);
  CHECK(inits[0].belief.entries[0].second == 1.0);
}

TEST_CASE("initial beliefs: Bayes posterior under a noisy kernel") {
  GameSpec spec = toy_b();
  spec.kappa0 = {0.5, 0.5};
  const AugmentedGame aug = build_augmented(spec, delta_s0_flow(spec));
  const auto inits = initial_beliefs(aug);
  REQUIRE(inits.size() == 2);
  double total = 0.0;
  for (const auto& init : inits) total += init.probability;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-15));
  // y0: posterior (0.8, 0.2) over ((s0,0),(s1,0)).
  CHECK(inits[0].belief.entries[0].second == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(inits[0].belief.entries[1].second == doctest::Approx(0.2).epsilon(1e-15));
}

TEST_CASE("uninformative observations leave the prior untouched") {
  GameSpec spec = toy_b();
  spec.kappa0 = {0.3, 0.7};
  spec.observation_kernel = {0.5, 0.5, 0.5, 0.5};
  const AugmentedGame aug = build_augmented(spec, delta_s0_flow(spec));
  for (const auto& init : initial_beliefs(aug)) {
    CHECK(init.probability == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(init.belief.entries[0].second == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(init.belief.entries[1].second == doctest::Approx(0.7).epsilon(1e-15));
  }
}

TEST_CASE("observation marginal is the kernel row when uninformative") {
  GameSpec spec = toy_b();
  spec.observation_kernel = {0.4, 0.6, 0.4, 0.6};
  const AugmentedGame aug = build_augmented(spec, delta_s0_flow(spec));
  std::mt19937_64 rng(5);
  const Belief z = random_belief(rng, aug, 0);
  for (std::size_t a = 0; a < 2; ++a) {
    const std::vector<double> h = observation_marginal(aug, z, a);
    CHECK(h[0] == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(h[1] == doctest::Approx(0.6).epsilon(1e-12));
  }
}

TEST_CASE("toy_a: from (s0,0) action a1 makes y1 certain") {
  const GameSpec spec = toy_a();
  const AugmentedGame aug = build_augmented(spec, delta_s0_flow(spec));
  Belief z;
  z.stage = 0;
  z.entries = {{aug.aug_id(0, 0, 0), 1.0}};
  const std::vector<double> h = observation_marginal(aug, z, 1);
  CHECK(h[0] == 0.0);
  CHECK(h[1] == 1.0);
}

TEST_CASE("static kernel: observation marginal matches the forward algorithm") {
  // Identity transitions turn one step into a plain hidden-state readout.
  GameSpec spec = toy_b();
  spec.transition_couple.clear();
  spec.transition_base = {1, 0, 1, 0, 0, 1, 0, 1};  // stay put for any action
  spec.kappa0 = {0.35, 0.65};
  const AugmentedGame aug = build_augmented(spec, delta_s0_flow(spec));
  Belief z;
  z.stage = 0;
  z.entries = {{aug.aug_id(0, 0, 0), 0.35}, {aug.aug_id(0, 1, 0), 0.65}};
  const std::vector<double> h = observation_marginal(aug, z, 0);
  // sum_s l(y|s) z(s)
  CHECK(h[0] == doctest::Approx(0.35 * 0.8 + 0.65 * 0.2).epsilon(1e-15));
  CHECK(h[1] == doctest::Approx(0.35 * 0.2 + 0.65 * 0.8).epsilon(1e-15));
}

TEST_CASE("filter update: accuracy 0.8, identity transition, uniform prior") {
  GameSpec spec = toy_b();
  spec.transition_couple.clear();
  spec.transition_base = {1, 0, 1, 0, 0, 1, 0, 1};
  spec.cost_base.assign(4, 0.0);
  spec.cost_couple.clear();
  spec.kappa0 = {0.5, 0.5};
  const AugmentedGame aug = build_augmented(spec, delta_s0_flow(spec));
  Belief z;
  z.stage = 0;
  z.entries = {{aug.aug_id(0, 0, 0), 0.5}, {aug.aug_id(0, 1, 0), 0.5}};
  const Belief post = filter_update(aug, z, 0, 0);
  REQUIRE(post.entries.size() == 2);
  CHECK(post.entries[0].second == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(post.entries[1].second == doctest::Approx(0.2).epsilon(1e-15));
}

TEST_CASE("filter update from a Dirac under perfect observation stays Dirac") {
  const GameSpec spec = toy_a();
  const AugmentedGame aug = build_augmented(spec, delta_s0_flow(spec));
  Belief z;
  z.stage = 0;
  z.entries = {{aug.aug_id(0, 0, 0), 1.0}};
  const Belief post = filter_update(aug, z, 1, 1);
  REQUIRE(post.entries.size() == 1);
  const auto [s, li] = aug.decode(1, post.entries[0].first);
  CHECK(s == 1);
  CHECK(aug.level_value(1, li) == 0.0);  // m(s0,a1,delta_s0) = 0
  CHECK(post.entries[0].second == 1.0);
}

TEST_CASE("filter update rejects zero-probability observations") {
  const GameSpec spec = toy_a();
  const AugmentedGame aug = build_augmented(spec, delta_s0_flow(spec));
  Belief z;
  z.stage = 0;
  z.entries = {{aug.aug_id(0, 0, 0), 1.0}};
  CHECK_THROWS_AS(filter_update(aug, z, 1, 0), ZeroProbabilityObservation);
}

TEST_CASE("belief cost vanishes before the terminal stage") {
  const GameSpec spec = toy_a();
  const AugmentedGame aug = build_augmented(spec, delta_s0_flow(spec));
  std::mt19937_64 rng(6);
  const Belief z = random_belief(rng, aug, 1);
  CHECK(belief_cost(aug, z, 0) == 0.0);
  CHECK(belief_cost(aug, z, 1) == 0.0);
}

TEST_CASE("terminal belief cost is the expected exponential") {
  const GameSpec spec = toy_a();
  const AugmentedGame aug = build_augmented(spec, delta_s0_flow(spec));
  Belief dirac;
  dirac.stage = 2;
  dirac.entries = {{aug.aug_id(2, 0, 0), 1.0}};
  CHECK(belief_cost(aug, dirac, 0) == 1.0);

  // Uniform over levels {0, log 2} at lambda = 1 costs (1 + 2) / 2.
  GameSpec spec2 = toy_a();
  spec2.cost_base = {0, 0, std::log(2.0), std::log(2.0)};
  spec2.cost_couple.clear();
  spec2.horizon_T = 0;
  MeasureFlow flow;
  flow.stages.assign(2, {FlowAtom{0, 0.0, 1.0}});
  const AugmentedGame aug2 = build_augmented(spec2, flow);
  REQUIRE(aug2.num_levels(1) == 2);
  Belief mixed;
  mixed.stage = 1;
  mixed.entries = {{aug2.aug_id(1, 0, 0), 0.5}, {aug2.aug_id(1, 0, 1), 0.5}};
  CHECK(belief_cost(aug2, mixed, 0) == doctest::Approx(1.5).epsilon(1e-15));
}

TEST_CASE("tree shape for T = 0 with full-support branches") {
  GameSpec spec = toy_b();
  spec.horizon_T = 0;
  spec.kappa0 = {0.5, 0.5};
  MeasureFlow flow;
  flow.stages.assign(2, {FlowAtom{0, 0.0, 0.5}, FlowAtom{1, 0.0, 0.5}});
  const AugmentedGame aug = build_augmented(spec, flow);
  const BeliefTree tree = expand_tree(aug);
  REQUIRE(tree.roots().size() == 2);
  // Each root branches over 2 actions x 2 observations.
  CHECK(tree.num_nodes() == 2 + 2 * 4);
  CHECK(tree.num_stages() == 2);
}

TEST_CASE("toy_a tree is made of Dirac beliefs mirroring state paths") {
  const GameSpec spec = toy_a();
  const AugmentedGame aug = build_augmented(spec, delta_s0_flow(spec));
  const BeliefTree tree = expand_tree(aug);
  for (const BeliefNode& node : tree.nodes()) {
    REQUIRE(node.belief.entries.size() == 1);
    CHECK(node.belief.entries[0].second == 1.0);
    // Perfect observations: the belief's state equals the last observation.
    const auto [s, li] = aug.decode(node.stage, node.belief.entries[0].first);
    (void)li;
    CHECK(s == node.parent_obs);
  }
}

TEST_CASE("uninformative observations collapse beliefs across branches") {
  GameSpec spec = toy_b();
  spec.observation_kernel = {0.5, 0.5, 0.5, 0.5};
  spec.kappa0 = {0.6, 0.4};
  const AugmentedGame aug = build_augmented(spec, delta_s0_flow(spec));
  const BeliefTree tree = expand_tree(aug);
  // Nodes reached by the same action sequence must share one belief.
  std::map<std::vector<std::size_t>, Belief> by_actions;
  for (std::size_t id = 0; id < tree.num_nodes(); ++id) {
    std::vector<std::size_t> actions;
    std::ptrdiff_t cur = static_cast<std::ptrdiff_t>(id);
    while (cur >= 0) {
      if (tree.node(cur).parent >= 0) {
        actions.push_back(tree.node(cur).parent_action);
      }
      cur = tree.node(cur).parent;
    }
    auto [it, inserted] = by_actions.try_emplace(actions, tree.node(id).belief);
    if (!inserted) {
      REQUIRE(it->second.entries.size() == tree.node(id).belief.entries.size());
      for (std::size_t k = 0; k < it->second.entries.size(); ++k) {
        CHECK(it->second.entries[k].first ==
              tree.node(id).belief.entries[k].first);
        CHECK(it->second.entries[k].second ==
              doctest::Approx(tree.node(id).belief.entries[k].second)
                  .epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("node cap throws") {
  const GameSpec spec = toy_b();
  const AugmentedGame aug = build_augmented(spec, delta_s0_flow(spec));
  ExpandOptions options;
  options.max_nodes = 3;
  CHECK_THROWS_AS(expand_tree(aug, options), CapExceeded);
}

TEST_CASE("filter conservation and normalization on random instances") {
  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 10; ++rep) {
    testsupport::SpecShape shape;
    shape.n_s = 2 + rep % 2;
    shape.n_a = 2;
    shape.n_y = 2 + rep % 2;
    shape.horizon_T = 1 + rep % 2;
    shape.couple_q = rep % 2 == 0;
    shape.couple_m = true;
    shape.beta = 0.8;
    const GameSpec spec = testsupport::random_spec(rng, shape);
    const MeasureFlow flow = testsupport::random_flat_flow(rng, spec);
    const AugmentedGame aug = build_augmented(spec, flow);
    for (int pair = 0; pair < 40; ++pair) {
      const std::size_t t = pair % (spec.horizon_T + 1);
      const Belief z = random_belief(rng, aug, t);
      const std::size_t a = pair % spec.num_actions();
      const Belief pred = predicted_belief(aug, z, a);
      const std::vector<double> h = observation_marginal(aug, z, a);
      double h_total = 0.0;
      std::map<std::size_t, double> mixture;
      double expected_terminal = 0.0;
      for (std::size_t y = 0; y < spec.num_observations(); ++y) {
        h_total += h[y];
        if (h[y] <= 0.0) continue;
        const Belief post = filter_update(aug, z, a, y);
        CHECK(post.mass() == doctest::Approx(1.0).epsilon(1e-10));
        for (const auto& [id, m] : post.entries) mixture[id] += h[y] * m;
        if (t == spec.horizon_T) {
          expected_terminal += h[y] * belief_cost(aug, post, 0);
        }
      }
      CHECK(h_total == doctest::Approx(1.0).epsilon(1e-10));
      // Law of total probability: sum_y H(y) F(z,a,y) = predicted belief.
      REQUIRE(mixture.size() == pred.entries.size());
      for (const auto& [id, m] : pred.entries) {
        CHECK(mixture[id] == doctest::Approx(m).epsilon(1e-10));
      }
      // Law of total expectation at the terminal stage.
      if (t == spec.horizon_T) {
        CHECK(expected_terminal ==
              doctest::Approx(belief_cost(aug, pred, 0)).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("decoupled tree beliefs match the forward-algorithm oracle") {
  std::mt19937_64 rng(8);
  testsupport::SpecShape shape;
  shape.n_s = 3;
  shape.n_a = 2;
  shape.n_y = 2;
  shape.horizon_T = 2;
  shape.beta = 0.9;
  const GameSpec spec = testsupport::random_spec(rng, shape);
  const AugmentedGame aug = build_augmented(spec, delta_s0_flow(spec));
  const BeliefTree tree = expand_tree(aug);
  for (std::size_t id = 0; id < tree.num_nodes(); ++id) {
    const BeliefNode& node = tree.node(id);
    std::vector<std::size_t> obs = tree.observation_history(id);
    std::vector<std::size_t> actions;
    std::ptrdiff_t cur = static_cast<std::ptrdiff_t>(id);
    while (cur >= 0) {
      if (tree.node(cur).parent >= 0) {
        actions.push_back(tree.node(cur).parent_action);
      }
      cur = tree.node(cur).parent;
    }
    std::reverse(actions.begin(), actions.end());
    const std::vector<double> oracle =
        testsupport::hmm_posterior(spec, obs, actions);
    std::vector<double> marginal(spec.num_states(), 0.0);
    for (const auto& [xid, m] : node.belief.entries) {
      marginal[aug.decode(node.stage, xid).first] += m;
    }
    for (std::size_t s = 0; s < spec.num_states(); ++s) {
      CHECK(marginal[s] == doctest::Approx(oracle[s]).epsilon(1e-10));
    }
  }
}
