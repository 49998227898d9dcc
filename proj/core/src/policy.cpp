#include "rsmfg/policy.hpp"

#include <stdexcept>

#include "rsmfg/errors.hpp"
#include "rsmfg/rng.hpp"

namespace rsmfg {

CompiledPolicy compile_policy(const BeliefTree& tree, const PolicyTree& policy,
                              std::size_t num_observations) {
  if (policy.action_by_node.size() != tree.num_nodes()) {
    throw std::invalid_argument("compile_policy: policy does not match tree");
  }
  CompiledPolicy out;
  out.root_by_obs.assign(num_observations, -1);
  // tree node id -> compiled node id, built by following assigned actions.
  std::vector<std::ptrdiff_t> compiled_id(tree.num_nodes(), -1);
  std::vector<std::size_t> frontier;
  for (std::size_t i = 0; i < tree.roots().size(); ++i) {
    const std::size_t root = tree.roots()[i];
    compiled_id[root] = static_cast<std::ptrdiff_t>(out.nodes.size());
    out.root_by_obs[tree.node(root).parent_obs] = compiled_id[root];
    out.nodes.push_back({policy.action_by_node[root], {}});
    frontier.push_back(root);
  }
  for (std::size_t k = 0; k < frontier.size(); ++k) {
    const std::size_t id = frontier[k];
    const BeliefNode& node = tree.node(id);
    if (node.children.empty()) continue;
    const std::size_t a = policy.action_by_node[id];
    out.nodes[compiled_id[id]].next.assign(num_observations, -1);
    for (std::size_t y = 0; y < num_observations; ++y) {
      const std::ptrdiff_t child = node.children[a * num_observations + y];
      if (child < 0) continue;
      compiled_id[child] = static_cast<std::ptrdiff_t>(out.nodes.size());
      out.nodes.push_back({policy.action_by_node[child], {}});
      out.nodes[compiled_id[id]].next[y] = compiled_id[child];
      frontier.push_back(static_cast<std::size_t>(child));
    }
  }
  return out;
}

CompiledPolicy constant_policy(std::size_t action,
                               std::size_t num_observations) {
  CompiledPolicy out;
  out.nodes.push_back({action, std::vector<std::ptrdiff_t>(num_observations, 0)});
  out.root_by_obs.assign(num_observations, 0);
  return out;
}

PolicyTree random_policy_tree(const BeliefTree& tree, std::size_t num_actions,
                              std::uint64_t seed, std::uint64_t index) {
  PolicyTree policy;
  policy.action_by_node.resize(tree.num_nodes());
  for (std::size_t id = 0; id < tree.num_nodes(); ++id) {
    CounterRng rng(seed, index, id, 0,
                   static_cast<std::uint64_t>(DrawKind::policy_generation));
    policy.action_by_node[id] =
        static_cast<std::size_t>(rng.next_uniform() * num_actions);
    if (policy.action_by_node[id] >= num_actions) {
      policy.action_by_node[id] = num_actions - 1;
    }
  }
  return policy;
}

std::size_t ObservationMapPolicy::action(
    const std::vector<std::size_t>& obs_history) const {
  std::size_t idx = 0;
  std::size_t weight = 1;
  for (std::size_t y : obs_history) {
    idx += y * weight;
    weight *= num_observations;
  }
  return actions_by_stage.at(obs_history.size() - 1).at(idx);
}

CompiledPolicy compile_policy(const ObservationMapPolicy& policy,
                              std::size_t horizon_T) {
  const std::size_t ny = policy.num_observations;
  CompiledPolicy out;
  out.root_by_obs.assign(ny, -1);
  // One compiled node per observation history, stage by stage.
  struct Item {
    std::size_t stage;
    std::size_t history_index;
    std::ptrdiff_t compiled;
  };
  std::vector<Item> frontier;
  for (std::size_t y0 = 0; y0 < ny; ++y0) {
    out.root_by_obs[y0] = static_cast<std::ptrdiff_t>(out.nodes.size());
    out.nodes.push_back({policy.actions_by_stage.at(0).at(y0), {}});
    frontier.push_back({0, y0, out.root_by_obs[y0]});
  }
  for (std::size_t k = 0; k < frontier.size(); ++k) {
    const Item item = frontier[k];
    if (item.stage + 1 >= policy.actions_by_stage.size() ||
        item.stage >= horizon_T) {
      continue;
    }
    std::size_t weight = 1;
    for (std::size_t i = 0; i <= item.stage; ++i) weight *= ny;
    out.nodes[item.compiled].next.assign(ny, -1);
    for (std::size_t y = 0; y < ny; ++y) {
      const std::size_t child_index = item.history_index + y * weight;
      const std::ptrdiff_t child = static_cast<std::ptrdiff_t>(out.nodes.size());
      out.nodes.push_back(
          {policy.actions_by_stage.at(item.stage + 1).at(child_index), {}});
      out.nodes[item.compiled].next[y] = child;
      frontier.push_back({item.stage + 1, child_index, child});
    }
  }
  return out;
}

std::map<std::string, std::string> policy_to_history_map(
    const BeliefTree& tree, const PolicyTree& policy,
    const std::vector<std::string>& obs_labels,
    const std::vector<std::string>& action_labels) {
  std::map<std::string, std::string> out;
  for (std::size_t id = 0; id < tree.num_nodes(); ++id) {
    out[tree.history_key(id, obs_labels, action_labels)] =
        action_labels[policy.action_by_node[id]];
  }
  return out;
}

namespace {

std::size_t label_index(const std::vector<std::string>& labels,
                        const std::string& label, const char* what) {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == label) return i;
  }
  throw IoError(std::string("unknown ") + what + " label '" + label + "'");
}

}  // namespace

CompiledPolicy compile_history_map(
    const std::map<std::string, std::string>& history_to_action,
    const std::vector<std::string>& obs_labels,
    const std::vector<std::string>& action_labels) {
  const std::size_t ny = obs_labels.size();
  CompiledPolicy out;
  out.root_by_obs.assign(ny, -1);
  struct Item {
    std::string key;
    std::ptrdiff_t compiled;
  };
  std::vector<Item> frontier;
  for (std::size_t y0 = 0; y0 < ny; ++y0) {
    auto it = history_to_action.find(obs_labels[y0]);
    if (it == history_to_action.end()) continue;
    out.root_by_obs[y0] = static_cast<std::ptrdiff_t>(out.nodes.size());
    out.nodes.push_back(
        {label_index(action_labels, it->second, "action"), {}});
    frontier.push_back({obs_labels[y0], out.root_by_obs[y0]});
  }
  if (out.nodes.empty()) {
    throw IoError("policy map has no root entries");
  }
  for (std::size_t k = 0; k < frontier.size(); ++k) {
    const Item item = frontier[k];
    const std::string prefix =
        item.key + "/" + action_labels[out.nodes[item.compiled].action] + "/";
    for (std::size_t y = 0; y < ny; ++y) {
      auto it = history_to_action.find(prefix + obs_labels[y]);
      if (it == history_to_action.end()) continue;
      if (out.nodes[item.compiled].next.empty()) {
        out.nodes[item.compiled].next.assign(ny, -1);
      }
      const std::ptrdiff_t child = static_cast<std::ptrdiff_t>(out.nodes.size());
      out.nodes.push_back(
          {label_index(action_labels, it->second, "action"), {}});
      out.nodes[item.compiled].next[y] = child;
      frontier.push_back({prefix + obs_labels[y], child});
    }
  }
  return out;
}

}  // namespace rsmfg
