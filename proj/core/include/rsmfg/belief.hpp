#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "rsmfg/augmented.hpp"

namespace rsmfg {

// Posterior over stage-t augmented states given the observation-action
// history. Entries are (augmented state id, mass), sorted by id; reachable
// supports are tiny relative to the full product space, hence sparse.
struct Belief {
  std::size_t stage = 0;
  std::vector<std::pair<std::size_t, double>> entries;

  double mass() const;
  void normalize();
};

struct InitialBelief {
  std::size_t observation;
  double probability;
  Belief belief;
};

// Bayes posteriors of the initial distribution given the first observation,
// one entry per observation with positive marginal; probabilities sum to 1.
std::vector<InitialBelief> initial_beliefs(const AugmentedGame& aug);

// One-step-ahead belief before the next observation arrives.
Belief predicted_belief(const AugmentedGame& aug, const Belief& z,
                        std::size_t a);

// Probability of each next observation given (z, a).
std::vector<double> observation_marginal(const AugmentedGame& aug,
                                         const Belief& z, std::size_t a);

// Bayes update to the stage-(t+1) posterior. Throws
// ZeroProbabilityObservation when y has zero predictive probability.
Belief filter_update(const AugmentedGame& aug, const Belief& z, std::size_t a,
                     std::size_t y);

// Expected stage cost of the belief state: 0 before the terminal stage,
// sum_x z(x) * exp(lambda * level(x)) at the terminal stage (independent of a).
double belief_cost(const AugmentedGame& aug, const Belief& z, std::size_t a);

// One reachable observation-action history. Children exist for stages <= T
// and are indexed by (action, next observation); zero-probability
// observations are pruned (child id -1).
struct BeliefNode {
  std::size_t stage = 0;
  std::ptrdiff_t parent = -1;
  std::size_t parent_action = 0;  // action on the edge into this node
  std::size_t parent_obs = 0;     // observation on the edge (y0 for roots)
  Belief belief;
  std::vector<std::ptrdiff_t> children;  // [a * n_y + y], empty at stage T+1
  std::vector<double> obs_prob;          // H(y | z, a), same indexing
};

struct ExpandOptions {
  std::size_t max_nodes = 10000000;
};

// Forest of all reachable beliefs over stages 0..T+1, one root per initial
// observation with positive probability. Expansion order is deterministic:
// roots by observation index, children by (action, observation) index, stage
// by stage, so node ids are reproducible.
class BeliefTree {
 public:
  const std::vector<BeliefNode>& nodes() const { return nodes_; }
  const BeliefNode& node(std::size_t id) const { return nodes_[id]; }
  std::size_t num_nodes() const { return nodes_.size(); }
  std::size_t num_actions() const { return n_a_; }
  std::size_t num_observations() const { return n_y_; }

  const std::vector<std::size_t>& roots() const { return roots_; }
  double root_probability(std::size_t i) const { return root_prob_[i]; }

  // Half-open node id range [first, second) of one stage.
  std::pair<std::size_t, std::size_t> stage_range(std::size_t t) const {
    return stage_ranges_[t];
  }
  std::size_t num_stages() const { return stage_ranges_.size(); }

  // Observations along the path from the root to this node, oldest first.
  std::vector<std::size_t> observation_history(std::size_t id) const;
  // Alternating observation/action labels "y0/a0/y1/...", the node's identity.
  std::string history_key(std::size_t id,
                          const std::vector<std::string>& obs_labels,
                          const std::vector<std::string>& action_labels) const;

  friend BeliefTree expand_tree(const AugmentedGame& aug,
                                const ExpandOptions& options);

 private:
  std::size_t n_a_ = 0, n_y_ = 0;
  std::vector<BeliefNode> nodes_;
  std::vector<std::size_t> roots_;
  std::vector<double> root_prob_;
  std::vector<std::pair<std::size_t, std::size_t>> stage_ranges_;
};

BeliefTree expand_tree(const AugmentedGame& aug,
                       const ExpandOptions& options = {});

}  // namespace rsmfg
