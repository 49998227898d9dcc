#include "rsmfg/belief.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "rsmfg/errors.hpp"

namespace rsmfg {

double Belief::mass() const {
  double sum = 0.0;
  for (const auto& [id, m] : entries) sum += m;
  return sum;
}

void Belief::normalize() {
  const double sum = mass();
  if (sum <= 0.0) {
    throw std::logic_error("Belief::normalize: total mass is not positive");
  }
  for (auto& [id, m] : entries) m /= sum;
}

std::vector<InitialBelief> initial_beliefs(const AugmentedGame& aug) {
  const std::size_t ns = aug.num_states();
  const std::size_t ny = aug.num_observations();
  const std::vector<double>& kappa0 = aug.initial_distribution();
  std::vector<InitialBelief> out;
  for (std::size_t y = 0; y < ny; ++y) {
    double prob = 0.0;
    Belief z;
    z.stage = 0;
    for (std::size_t s = 0; s < ns; ++s) {
      const double w = aug.observation(s, y) * kappa0[s];
      if (w > 0.0) {
        z.entries.emplace_back(aug.aug_id(0, s, 0), w);
        prob += w;
      }
    }
    if (prob <= 0.0) continue;
    for (auto& [id, m] : z.entries) m /= prob;
    out.push_back({y, prob, std::move(z)});
  }
  return out;
}

Belief predicted_belief(const AugmentedGame& aug, const Belief& z,
                        std::size_t a) {
  const std::size_t t = z.stage;
  if (t + 1 >= aug.num_stages()) {
    throw std::invalid_argument("predicted_belief: no stage after T+1");
  }
  std::map<std::size_t, double> acc;
  for (const auto& [id, m] : z.entries) {
    const auto [s, li] = aug.decode(t, id);
    const std::size_t li2 = aug.level_successor(t, li, s, a);
    for (std::size_t s2 = 0; s2 < aug.num_states(); ++s2) {
      const double p = aug.kernel(t, s, a, s2);
      if (p > 0.0) acc[aug.aug_id(t + 1, s2, li2)] += m * p;
    }
  }
  Belief pred;
  pred.stage = t + 1;
  pred.entries.assign(acc.begin(), acc.end());
  return pred;
}

std::vector<double> observation_marginal(const AugmentedGame& aug,
                                         const Belief& z, std::size_t a) {
  const Belief pred = predicted_belief(aug, z, a);
  std::vector<double> h(aug.num_observations(), 0.0);
  for (const auto& [id, m] : pred.entries) {
    const std::size_t s2 = aug.decode(pred.stage, id).first;
    for (std::size_t y = 0; y < aug.num_observations(); ++y) {
      h[y] += m * aug.observation(s2, y);
    }
  }
  return h;
}

namespace {

Belief filter_from_prediction(const AugmentedGame& aug, const Belief& pred,
                              std::size_t y, double h_y) {
  Belief post;
  post.stage = pred.stage;
  for (const auto& [id, m] : pred.entries) {
    const std::size_t s2 = aug.decode(pred.stage, id).first;
    const double w = m * aug.observation(s2, y);
    if (w > 0.0) post.entries.emplace_back(id, w / h_y);
  }
  return post;
}

}  // namespace

Belief filter_update(const AugmentedGame& aug, const Belief& z, std::size_t a,
                     std::size_t y) {
  const Belief pred = predicted_belief(aug, z, a);
  double h_y = 0.0;
  for (const auto& [id, m] : pred.entries) {
    h_y += m * aug.observation(aug.decode(pred.stage, id).first, y);
  }
  if (h_y <= 0.0) {
    throw ZeroProbabilityObservation(
        "filter_update: observation " + std::to_string(y) +
        " has zero probability from stage " + std::to_string(z.stage) +
        " under action " + std::to_string(a));
  }
  return filter_from_prediction(aug, pred, y, h_y);
}

double belief_cost(const AugmentedGame& aug, const Belief& z, std::size_t a) {
  (void)a;
  if (z.stage != aug.horizon_T() + 1) return 0.0;
  double cost = 0.0;
  for (const auto& [id, m] : z.entries) {
    cost += m * aug.terminal_cost_at(aug.decode(z.stage, id).second);
  }
  return cost;
}

std::vector<std::size_t> BeliefTree::observation_history(std::size_t id) const {
  std::vector<std::size_t> obs;
  std::ptrdiff_t cur = static_cast<std::ptrdiff_t>(id);
  while (cur >= 0) {
    obs.push_back(nodes_[cur].parent_obs);
    cur = nodes_[cur].parent;
  }
  std::reverse(obs.begin(), obs.end());
  return obs;
}

std::string BeliefTree::history_key(
    std::size_t id, const std::vector<std::string>& obs_labels,
    const std::vector<std::string>& action_labels) const {
  std::vector<std::string> parts;
  std::ptrdiff_t cur = static_cast<std::ptrdiff_t>(id);
  while (cur >= 0) {
    parts.push_back(obs_labels[nodes_[cur].parent_obs]);
    if (nodes_[cur].parent >= 0) {
      parts.push_back(action_labels[nodes_[cur].parent_action]);
    }
    cur = nodes_[cur].parent;
  }
  std::string key;
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) {
    if (!key.empty()) key += '/';
    key += *it;
  }
  return key;
}

BeliefTree expand_tree(const AugmentedGame& aug, const ExpandOptions& options) {
  BeliefTree tree;
  const std::size_t T = aug.horizon_T();
  const std::size_t na = aug.num_actions();
  const std::size_t ny = aug.num_observations();
  tree.n_a_ = na;
  tree.n_y_ = ny;

  for (const InitialBelief& init : initial_beliefs(aug)) {
    BeliefNode node;
    node.stage = 0;
    node.parent = -1;
    node.parent_obs = init.observation;
    node.belief = init.belief;
    tree.roots_.push_back(tree.nodes_.size());
    tree.root_prob_.push_back(init.probability);
    tree.nodes_.push_back(std::move(node));
  }
  tree.stage_ranges_.push_back({0, tree.nodes_.size()});

  std::size_t begin = 0, end = tree.nodes_.size();
  for (std::size_t t = 0; t <= T; ++t) {
    const std::size_t next_begin = tree.nodes_.size();
    for (std::size_t id = begin; id < end; ++id) {
      tree.nodes_[id].children.assign(na * ny, -1);
      tree.nodes_[id].obs_prob.assign(na * ny, 0.0);
      for (std::size_t a = 0; a < na; ++a) {
        const Belief pred = predicted_belief(aug, tree.nodes_[id].belief, a);
        std::vector<double> h(ny, 0.0);
        for (const auto& [xid, m] : pred.entries) {
          const std::size_t s2 = aug.decode(pred.stage, xid).first;
          for (std::size_t y = 0; y < ny; ++y) {
            h[y] += m * aug.observation(s2, y);
          }
        }
        for (std::size_t y = 0; y < ny; ++y) {
          tree.nodes_[id].obs_prob[a * ny + y] = h[y];
          if (h[y] <= 0.0) continue;
          if (tree.nodes_.size() >= options.max_nodes) {
            throw CapExceeded("belief tree exceeded node cap of " +
                              std::to_string(options.max_nodes) + " at stage " +
                              std::to_string(t + 1));
          }
          BeliefNode child;
          child.stage = t + 1;
          child.parent = static_cast<std::ptrdiff_t>(id);
          child.parent_action = a;
          child.parent_obs = y;
          child.belief = filter_from_prediction(aug, pred, y, h[y]);
          tree.nodes_[id].children[a * ny + y] =
              static_cast<std::ptrdiff_t>(tree.nodes_.size());
          tree.nodes_.push_back(std::move(child));
        }
      }
    }
    begin = next_begin;
    end = tree.nodes_.size();
    tree.stage_ranges_.push_back({begin, end});
  }
  return tree;
}

}  // namespace rsmfg
