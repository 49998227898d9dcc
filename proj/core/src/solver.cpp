#include "rsmfg/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>

namespace rsmfg {

BellmanStage bellman_backup(const AugmentedGame& aug, const BeliefTree& tree,
                            std::size_t t, const std::vector<double>& values,
                            TieBreak tie_break) {
  const auto [begin, end] = tree.stage_range(t);
  BellmanStage out;
  out.values.resize(end - begin);
  out.actions.assign(end - begin, 0);
  const std::size_t ny = aug.num_observations();

  for (std::size_t id = begin; id < end; ++id) {
    const BeliefNode& node = tree.node(id);
    if (t == aug.horizon_T() + 1) {
      out.values[id - begin] = belief_cost(aug, node.belief, 0);
      continue;
    }
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_action = 0;
    for (std::size_t a = 0; a < aug.num_actions(); ++a) {
      double q = 0.0;  // stage cost is zero before the terminal stage
      for (std::size_t y = 0; y < ny; ++y) {
        const std::ptrdiff_t child = node.children[a * ny + y];
        if (child < 0) continue;
        q += node.obs_prob[a * ny + y] * values[child];
      }
      const bool take = tie_break == TieBreak::lowest_action ? q < best
                                                             : q <= best;
      if (take) {
        best = q;
        best_action = a;
      }
    }
    out.values[id - begin] = best;
    out.actions[id - begin] = best_action;
  }
  return out;
}

SolveResult solve_pomdp(const AugmentedGame& aug, const ExpandOptions& options,
                        TieBreak tie_break) {
  SolveResult result;
  result.tree = expand_tree(aug, options);
  result.values.assign(result.tree.num_nodes(), 0.0);
  result.policy.action_by_node.assign(result.tree.num_nodes(), 0);
  for (std::size_t t = aug.horizon_T() + 2; t-- > 0;) {
    const BellmanStage stage =
        bellman_backup(aug, result.tree, t, result.values, tie_break);
    const auto [begin, end] = result.tree.stage_range(t);
    for (std::size_t id = begin; id < end; ++id) {
      result.values[id] = stage.values[id - begin];
      result.policy.action_by_node[id] = stage.actions[id - begin];
    }
  }
  result.value = 0.0;
  for (std::size_t i = 0; i < result.tree.roots().size(); ++i) {
    result.value +=
        result.tree.root_probability(i) * result.values[result.tree.roots()[i]];
  }
  return result;
}

std::vector<double> reach_probabilities(const BeliefTree& tree,
                                        const PolicyTree& policy) {
  std::vector<double> reach(tree.num_nodes(), 0.0);
  for (std::size_t i = 0; i < tree.roots().size(); ++i) {
    reach[tree.roots()[i]] = tree.root_probability(i);
  }
  // Node ids are stage-ordered, so one forward sweep suffices.
  const std::size_t n_y = tree.num_observations();
  for (std::size_t id = 0; id < tree.num_nodes(); ++id) {
    const BeliefNode& node = tree.node(id);
    if (node.children.empty() || reach[id] == 0.0) continue;
    const std::size_t a = policy.action_by_node[id];
    for (std::size_t y = 0; y < n_y; ++y) {
      const std::ptrdiff_t child = node.children[a * n_y + y];
      if (child < 0) continue;
      reach[child] += reach[id] * node.obs_prob[a * n_y + y];
    }
  }
  return reach;
}

double evaluate_policy(const AugmentedGame& aug, const BeliefTree& tree,
                       const PolicyTree& policy) {
  const std::vector<double> reach = reach_probabilities(tree, policy);
  const auto [begin, end] = tree.stage_range(aug.horizon_T() + 1);
  double value = 0.0;
  for (std::size_t id = begin; id < end; ++id) {
    if (reach[id] == 0.0) continue;
    value += reach[id] * belief_cost(aug, tree.node(id).belief, 0);
  }
  return value;
}

MeasureFlow propagate_flow(const AugmentedGame& aug, const BeliefTree& tree,
                           const PolicyTree& policy) {
  const std::vector<double> reach = reach_probabilities(tree, policy);
  MeasureFlow flow;
  flow.stages.resize(aug.num_stages());
  // Stage 0 is pinned to the exact initial condition.
  for (std::size_t s = 0; s < aug.num_states(); ++s) {
    if (aug.initial_distribution()[s] > 0.0) {
      flow.stages[0].push_back({s, 0.0, aug.initial_distribution()[s]});
    }
  }
  for (std::size_t t = 1; t < aug.num_stages(); ++t) {
    // Aggregate reach-weighted beliefs per (state, level index); the level
    // table is shared by all beliefs of a stage, so matching is exact.
    std::map<std::size_t, double> acc;
    const auto [begin, end] = tree.stage_range(t);
    for (std::size_t id = begin; id < end; ++id) {
      if (reach[id] == 0.0) continue;
      for (const auto& [xid, m] : tree.node(id).belief.entries) {
        acc[xid] += reach[id] * m;
      }
    }
    for (const auto& [xid, m] : acc) {
      const auto [s, li] = aug.decode(t, xid);
      flow.stages[t].push_back({s, aug.level_value(t, li), m});
    }
    flow.sort_stage(t);
  }
  return flow;
}

MeasureFlow propagate_flow(const GameSpec& spec, const PolicyTree& policy,
                           const MeasureFlow& flow_in) {
  const AugmentedGame aug = build_augmented(spec, flow_in);
  const BeliefTree tree = expand_tree(aug);
  if (policy.action_by_node.size() != tree.num_nodes()) {
    throw std::invalid_argument(
        "propagate_flow: policy was not built on the tree of flow_in");
  }
  return propagate_flow(aug, tree, policy);
}

double nce_residual(const MeasureFlow& a, const MeasureFlow& b) {
  if (a.num_stages() != b.num_stages()) {
    throw std::invalid_argument("nce_residual: stage counts differ");
  }
  double worst = 0.0;
  for (std::size_t t = 0; t < a.num_stages(); ++t) {
    const auto& sa = a.stages[t];
    const auto& sb = b.stages[t];
    double dist = 0.0;
    std::size_t i = 0, j = 0;
    while (i < sa.size() || j < sb.size()) {
      const bool a_first =
          j == sb.size() ||
          (i < sa.size() &&
           (sa[i].state < sb[j].state ||
            (sa[i].state == sb[j].state &&
             sa[i].level < sb[j].level - MeasureFlow::kLevelMatchTol)));
      const bool b_first =
          i == sa.size() ||
          (j < sb.size() &&
           (sb[j].state < sa[i].state ||
            (sb[j].state == sa[i].state &&
             sb[j].level < sa[i].level - MeasureFlow::kLevelMatchTol)));
      if (a_first) {
        dist += std::abs(sa[i].mass);
        ++i;
      } else if (b_first) {
        dist += std::abs(sb[j].mass);
        ++j;
      } else {
        dist += std::abs(sa[i].mass - sb[j].mass);
        ++i;
        ++j;
      }
    }
    worst = std::max(worst, dist);
  }
  return worst;
}

StateActionFlow state_action_flow(const BeliefTree& tree,
                                  const PolicyTree& policy) {
  const std::vector<double> reach = reach_probabilities(tree, policy);
  StateActionFlow nu;
  nu.stages.resize(tree.num_stages());
  for (std::size_t t = 0; t < tree.num_stages(); ++t) {
    const auto [begin, end] = tree.stage_range(t);
    for (std::size_t id = begin; id < end; ++id) {
      if (reach[id] == 0.0) continue;
      nu.stages[t].push_back({id, policy.action_by_node[id], reach[id]});
    }
  }
  return nu;
}

double pushforward_defect(const BeliefTree& tree, const StateActionFlow& nu) {
  double worst = 0.0;
  const std::size_t n_y = tree.num_observations();
  for (std::size_t t = 0; t + 1 < nu.stages.size(); ++t) {
    std::map<std::size_t, double> pushed;
    for (const auto& entry : nu.stages[t]) {
      const BeliefNode& node = tree.node(entry.node);
      for (std::size_t y = 0; y < n_y; ++y) {
        const std::ptrdiff_t child = node.children[entry.action * n_y + y];
        if (child < 0) continue;
        pushed[child] += entry.mass * node.obs_prob[entry.action * n_y + y];
      }
    }
    std::map<std::size_t, double> actual;
    for (const auto& entry : nu.stages[t + 1]) actual[entry.node] += entry.mass;
    double dist = 0.0;
    for (const auto& [node, mass] : pushed) {
      auto it = actual.find(node);
      dist += std::abs(mass - (it == actual.end() ? 0.0 : it->second));
    }
    for (const auto& [node, mass] : actual) {
      if (pushed.find(node) == pushed.end()) dist += std::abs(mass);
    }
    worst = std::max(worst, dist);
  }
  return worst;
}

double argmin_support_defect(const AugmentedGame& aug, const BeliefTree& tree,
                             const StateActionFlow& nu,
                             const std::vector<double>& values) {
  double worst = 0.0;
  const std::size_t ny = aug.num_observations();
  for (std::size_t t = 0; t + 1 < nu.stages.size(); ++t) {
    for (const auto& entry : nu.stages[t]) {
      const BeliefNode& node = tree.node(entry.node);
      double q = 0.0;
      for (std::size_t y = 0; y < ny; ++y) {
        const std::ptrdiff_t child = node.children[entry.action * ny + y];
        if (child < 0) continue;
        q += node.obs_prob[entry.action * ny + y] * values[child];
      }
      worst = std::max(worst, q - values[entry.node]);
    }
  }
  return worst;
}

namespace {

// Reindexes a policy onto another tree by matching observation-action
// histories edge by edge; nodes whose history does not exist in the source
// tree fall back to action 0.
PolicyTree map_policy_across(const BeliefTree& dst_tree,
                             const BeliefTree& src_tree,
                             const PolicyTree& src_policy,
                             std::size_t num_observations) {
  PolicyTree out;
  out.action_by_node.assign(dst_tree.num_nodes(), 0);
  std::vector<std::ptrdiff_t> src_of(dst_tree.num_nodes(), -1);
  std::map<std::size_t, std::size_t> src_roots;  // y0 -> src node
  for (std::size_t root : src_tree.roots()) {
    src_roots[src_tree.node(root).parent_obs] = root;
  }
  for (std::size_t id = 0; id < dst_tree.num_nodes(); ++id) {
    const BeliefNode& node = dst_tree.node(id);
    std::ptrdiff_t src = -1;
    if (node.parent < 0) {
      auto it = src_roots.find(node.parent_obs);
      if (it != src_roots.end()) src = static_cast<std::ptrdiff_t>(it->second);
    } else {
      const std::ptrdiff_t src_parent = src_of[node.parent];
      if (src_parent >= 0) {
        const BeliefNode& sp = src_tree.node(src_parent);
        if (!sp.children.empty()) {
          src = sp.children[node.parent_action * num_observations +
                            node.parent_obs];
        }
      }
    }
    src_of[id] = src;
    if (src >= 0) out.action_by_node[id] = src_policy.action_by_node[src];
  }
  return out;
}

}  // namespace

EquilibriumArtifact find_equilibrium(const GameSpec& spec,
                                     const EquilibriumOptions& options) {
  if (!(options.tol > 0.0)) {
    throw std::invalid_argument("find_equilibrium: tol must be positive");
  }
  if (!(options.damping > 0.0 && options.damping <= 1.0)) {
    throw std::invalid_argument("find_equilibrium: damping must be in (0, 1]");
  }
  const ExpandOptions expand{options.node_cap};

  // Seed iterate: propagate the policy optimal against the flat flow, so a
  // game without population coupling is already at its fixed point.
  AugmentedGame aug = build_augmented(spec, constant_initial_flow(spec),
                                      options.level_cap);
  SolveResult solved = solve_pomdp(aug, expand);
  MeasureFlow mu = propagate_flow(aug, solved.tree, solved.policy);

  EquilibriumArtifact artifact;
  artifact.nce_residual = std::numeric_limits<double>::max();
  bool have_best = false;
  double best_residual = std::numeric_limits<double>::max();
  MeasureFlow best_flow = mu;
  SolveResult best_solved;
  MeasureFlow prev_prev;
  for (std::size_t k = 1; k <= options.max_iter; ++k) {
    aug = build_augmented(spec, mu, options.level_cap);
    solved = solve_pomdp(aug, expand);
    const MeasureFlow pushed = propagate_flow(aug, solved.tree, solved.policy);
    MeasureFlow mu_next = blend_flows(mu, pushed, options.damping);
    const double residual = nce_residual(mu_next, mu);
    artifact.residual_history.push_back(residual);
    artifact.iterations = k;
    if (!have_best || residual < best_residual) {
      have_best = true;
      best_residual = residual;
      best_flow = mu_next;
      best_solved = solved;
    }
    if (residual < options.tol) {
      artifact.converged = true;
      artifact.nce_residual = residual;
      mu = std::move(mu_next);
      break;
    }
    if (k >= 2 && nce_residual(mu_next, prev_prev) < options.tol) {
      // The damped iteration revisited the iterate from two steps ago while
      // the step residual is still large: a period-2 cycle.
      artifact.cycle_detected = true;
      artifact.nce_residual = residual;
      mu = std::move(mu_next);
      break;
    }
    prev_prev = std::move(mu);
    mu = std::move(mu_next);
    artifact.nce_residual = residual;
  }
  if (!artifact.converged && have_best) {
    // Hand back the iterate with the smallest residual, with the policy that
    // produced it.
    artifact.nce_residual = best_residual;
    mu = std::move(best_flow);
    solved = std::move(best_solved);
  }

  // Certificate against the final flow: re-solve fresh, re-evaluate the
  // last policy on the fresh tree, and report its excess cost.
  const AugmentedGame aug_final = build_augmented(spec, mu, options.level_cap);
  SolveResult fresh = solve_pomdp(aug_final, expand);
  artifact.policy = map_policy_across(fresh.tree, solved.tree, solved.policy,
                                      spec.num_observations());
  artifact.value = evaluate_policy(aug_final, fresh.tree, artifact.policy);
  artifact.optimal_value = fresh.value;
  artifact.optimality_gap = std::max(0.0, artifact.value - fresh.value);
  artifact.node_values = std::move(fresh.values);
  artifact.flow = std::move(mu);
  return artifact;
}

double truncation_bound(const GameSpec& spec) {
  if (spec.beta >= 1.0) {
    throw std::domain_error(
        "truncation_bound: requires beta < 1 (no geometric tail otherwise)");
  }
  const double big_l = spec.cost_sup() / (1.0 - spec.beta);
  const double e = std::exp(spec.lambda * big_l);
  return e * (e - 1.0);
}

std::size_t choose_horizon(const GameSpec& spec, double epsilon) {
  if (spec.beta >= 1.0) {
    throw std::domain_error("choose_horizon: requires beta < 1");
  }
  if (!(epsilon > 0.0)) {
    throw std::invalid_argument("choose_horizon: epsilon must be positive");
  }
  const double theta = truncation_bound(spec);
  if (!std::isfinite(theta)) {
    throw std::domain_error(
        "choose_horizon: truncation constant overflows; lambda * K / (1 - "
        "beta) is too large");
  }
  const double target = epsilon / 3.0;
  double tail = theta * spec.beta;  // theta * beta^(T+1) at T = 0
  std::size_t T = 0;
  while (tail >= target) {
    tail *= spec.beta;
    ++T;
    if (T > 100000000) {
      throw std::domain_error("choose_horizon: horizon search did not finish");
    }
  }
  return T;
}

}  // namespace rsmfg
