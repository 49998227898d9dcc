#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rsmfg/belief.hpp"

namespace rsmfg {

// Deterministic action assignment at every node of a belief tree. Along the
// branch the policy itself realizes, the action is a function of the
// observations alone, so the assignment restricts to an observation-feedback
// policy.
struct PolicyTree {
  std::vector<std::size_t> action_by_node;
};

// Observation-indexed decision tree, the runtime form every policy is
// lowered to before simulation. Cursors are node ids; advancing consumes one
// observation. A cursor of -1 means the policy does not cover the realized
// history.
struct CompiledPolicy {
  struct Node {
    std::size_t action = 0;
    std::vector<std::ptrdiff_t> next;  // [y] -> node id or -1
  };
  std::vector<Node> nodes;
  std::vector<std::ptrdiff_t> root_by_obs;  // [y0] -> node id or -1

  std::ptrdiff_t start(std::size_t y0) const { return root_by_obs[y0]; }
  std::ptrdiff_t advance(std::ptrdiff_t cursor, std::size_t y) const {
    return nodes[cursor].next[y];
  }
  std::size_t action_at(std::ptrdiff_t cursor) const {
    return nodes[cursor].action;
  }
};

// Restriction of a tree policy to the branches it realizes (assigned actions
// only), keyed by observations.
CompiledPolicy compile_policy(const BeliefTree& tree, const PolicyTree& policy,
                              std::size_t num_observations);

// Policy that plays one action regardless of history.
CompiledPolicy constant_policy(std::size_t action, std::size_t num_observations);

// Uniformly random action at every tree node, drawn from a counter-based
// stream so the result is a pure function of (seed, index).
PolicyTree random_policy_tree(const BeliefTree& tree, std::size_t num_actions,
                              std::uint64_t seed, std::uint64_t index);

// Dense observation-feedback policy: an action for every observation history
// of every stage. History (y_0..y_t) is indexed as sum_k y_k * n_y^k.
struct ObservationMapPolicy {
  std::size_t num_observations = 1;
  std::vector<std::vector<std::size_t>> actions_by_stage;  // [t][history index]

  std::size_t action(const std::vector<std::size_t>& obs_history) const;
};

CompiledPolicy compile_policy(const ObservationMapPolicy& policy,
                              std::size_t horizon_T);

// Action for every tree node keyed by the node's alternating history
// "y0/a0/y1/...". This is the serialized form of an equilibrium policy.
std::map<std::string, std::string> policy_to_history_map(
    const BeliefTree& tree, const PolicyTree& policy,
    const std::vector<std::string>& obs_labels,
    const std::vector<std::string>& action_labels);

// Inverse of policy_to_history_map for the realized branches. Throws IoError
// on an unknown action label or when a root key is missing.
CompiledPolicy compile_history_map(
    const std::map<std::string, std::string>& history_to_action,
    const std::vector<std::string>& obs_labels,
    const std::vector<std::string>& action_labels);

}  // namespace rsmfg
