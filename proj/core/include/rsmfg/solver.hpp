#pragma once

#include <cstddef>
#include <vector>

#include "rsmfg/augmented.hpp"
#include "rsmfg/belief.hpp"
#include "rsmfg/flow.hpp"
#include "rsmfg/game_spec.hpp"
#include "rsmfg/policy.hpp"

namespace rsmfg {

enum class TieBreak {
  lowest_action,   // canonical deterministic selection
  highest_action,  // strongest distinct deviation among minimizers
};

struct BellmanStage {
  std::vector<double> values;        // aligned with the stage node range
  std::vector<std::size_t> actions;  // argmin per node
};

// One backward step: values for stage-t nodes from stage-(t+1) values.
// `values` is indexed by global node id and must be filled for stage t+1.
// At the terminal stage the value is the expected terminal cost, with no
// minimization (actions are reported as 0).
BellmanStage bellman_backup(const AugmentedGame& aug, const BeliefTree& tree,
                            std::size_t t, const std::vector<double>& values,
                            TieBreak tie_break = TieBreak::lowest_action);

struct SolveResult {
  BeliefTree tree;
  std::vector<double> values;  // optimal value at every node
  PolicyTree policy;           // argmin action at every node
  double value = 0.0;          // root mixture: sum_y0 P(y0) * value(root_y0)
};

// Exact finite-horizon solve of the belief MDP by backward induction over the
// reachable belief tree.
SolveResult solve_pomdp(const AugmentedGame& aug,
                        const ExpandOptions& options = {},
                        TieBreak tie_break = TieBreak::lowest_action);

// Exact forward evaluation of a deterministic tree policy: reach
// probabilities down the realized branches, expected terminal cost at leaves.
double evaluate_policy(const AugmentedGame& aug, const BeliefTree& tree,
                       const PolicyTree& policy);

// Reach probability of every node under the policy (zero off the realized
// branches).
std::vector<double> reach_probabilities(const BeliefTree& tree,
                                        const PolicyTree& policy);

// Population flow induced by the policy in the game frozen at the flow the
// augmented game was built from: mu_{t}(x) = sum_nodes reach * belief.
MeasureFlow propagate_flow(const AugmentedGame& aug, const BeliefTree& tree,
                           const PolicyTree& policy);

// Convenience overload matching the module contract: rebuilds the augmented
// game and tree from flow_in. The policy must have been produced on the tree
// of flow_in (node counts are checked).
MeasureFlow propagate_flow(const GameSpec& spec, const PolicyTree& policy,
                           const MeasureFlow& flow_in);

// Largest per-stage L1 distance between two flows on (state, level) atoms
// matched at the level tolerance; unmatched atoms contribute their full mass.
double nce_residual(const MeasureFlow& a, const MeasureFlow& b);

// Joint distribution over (belief node, action) induced by a deterministic
// policy, with reach-probability masses.
struct StateActionFlow {
  struct Entry {
    std::size_t node;
    std::size_t action;
    double mass;
  };
  std::vector<std::vector<Entry>> stages;
};

StateActionFlow state_action_flow(const BeliefTree& tree,
                                  const PolicyTree& policy);

// Consistency defect: max over stages of the L1 gap between stage-(t+1) node
// masses and the pushforward of stage-t masses through the branching
// probabilities.
double pushforward_defect(const BeliefTree& tree, const StateActionFlow& nu);

// Optimality defect: largest excess of a supported (node, action) pair's
// Q-value over the node's optimal value.
double argmin_support_defect(const AugmentedGame& aug, const BeliefTree& tree,
                             const StateActionFlow& nu,
                             const std::vector<double>& values);

struct EquilibriumOptions {
  double tol = 1e-9;
  std::size_t max_iter = 200;
  double damping = 0.5;  // in (0, 1]
  std::size_t level_cap = 1000000;
  std::size_t node_cap = 10000000;
};

struct EquilibriumArtifact {
  PolicyTree policy;     // indexed against the tree rebuilt from `flow`
  MeasureFlow flow;
  std::vector<double> node_values;  // optimal values on that tree
  double value = 0.0;          // cost of `policy` against `flow`
  double optimal_value = 0.0;  // optimal cost against `flow`
  double nce_residual = 0.0;
  double optimality_gap = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  bool cycle_detected = false;
  std::vector<double> residual_history;
};

// Damped fixed-point iteration over flows: solve the belief MDP against the
// current flow, propagate the optimal policy, blend, and repeat until the
// residual between consecutive iterates drops below tol. Non-convergence
// returns the best iterate seen, flagged, rather than throwing.
EquilibriumArtifact find_equilibrium(const GameSpec& spec,
                                     const EquilibriumOptions& options = {});

// Constant theta with |W_infinity - W_T| <= theta * beta^(T+1) for every
// policy, theta = e^(lambda L) (e^(lambda L) - 1), L = K / (1 - beta).
// Requires beta < 1.
double truncation_bound(const GameSpec& spec);

// Smallest T with theta * beta^(T+1) < epsilon / 3. Requires beta < 1.
std::size_t choose_horizon(const GameSpec& spec, double epsilon);

}  // namespace rsmfg
