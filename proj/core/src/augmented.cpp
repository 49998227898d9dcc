#include "rsmfg/augmented.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "rsmfg/errors.hpp"

namespace rsmfg {

std::ptrdiff_t CostLevelTable::find(const std::vector<double>& sorted,
                                    double value) {
  const auto it = std::lower_bound(sorted.begin(), sorted.end(), value);
  std::ptrdiff_t best = -1;
  double best_gap = std::numeric_limits<double>::infinity();
  if (it != sorted.begin()) {
    best = (it - sorted.begin()) - 1;
    best_gap = std::abs(sorted[best] - value);
  }
  if (it != sorted.end()) {
    const std::ptrdiff_t hi = it - sorted.begin();
    const double gap = std::abs(sorted[hi] - value);
    // Strict comparison keeps the lower index on an exact distance tie.
    if (gap < best_gap) {
      best = hi;
      best_gap = gap;
    }
  }
  return (best >= 0 && best_gap <= kLevelTol) ? best : -1;
}

namespace {

// Inserts value unless an existing level matches within tolerance; the
// first-seen value stays as the representative of its cluster.
void insert_level(std::vector<double>* sorted, double value) {
  if (CostLevelTable::find(*sorted, value) >= 0) return;
  sorted->insert(std::upper_bound(sorted->begin(), sorted->end(), value),
                 value);
}

}  // namespace

CostLevelTable enumerate_cost_levels(const GameSpec& spec,
                                     const MeasureFlow& flow,
                                     std::size_t max_levels_per_stage) {
  if (flow.num_stages() != spec.horizon_T + 2) {
    throw std::invalid_argument(
        "enumerate_cost_levels: flow must have T+2 stages");
  }
  CostLevelTable table;
  table.bound = spec.max_accumulated_cost();
  table.levels.resize(spec.horizon_T + 2);
  table.levels[0] = {0.0};
  double bt = 1.0;
  for (std::size_t t = 0; t <= spec.horizon_T; ++t) {
    const MeanField d = flow.state_marginal(t, spec.num_states());
    auto& next = table.levels[t + 1];
    for (double c : table.levels[t]) {
      for (std::size_t s = 0; s < spec.num_states(); ++s) {
        for (std::size_t a = 0; a < spec.num_actions(); ++a) {
          insert_level(&next, c + bt * eval_cost(spec, s, a, d));
        }
      }
      if (next.size() > max_levels_per_stage) {
        throw CapExceeded(
            "cost level enumeration exceeded cap: stage " +
            std::to_string(t + 1) + " holds more than " +
            std::to_string(max_levels_per_stage) + " levels (cap " +
            std::to_string(max_levels_per_stage) + ")");
      }
    }
    bt *= spec.beta;
  }
  return table;
}

AugmentedGame build_augmented(const GameSpec& spec, const MeasureFlow& flow,
                              std::size_t level_cap) {
  AugmentedGame aug;
  aug.n_s_ = spec.num_states();
  aug.n_a_ = spec.num_actions();
  aug.n_y_ = spec.num_observations();
  aug.beta_ = spec.beta;
  aug.lambda_ = spec.lambda;
  aug.horizon_T_ = spec.horizon_T;
  aug.kappa0_ = spec.kappa0;
  aug.observation_kernel_ = spec.observation_kernel;
  aug.levels_ = enumerate_cost_levels(spec, flow, level_cap);
  aug.built_from_ = flow;

  const std::size_t T = spec.horizon_T;
  aug.marginals_.resize(T + 2);
  for (std::size_t t = 0; t <= T + 1; ++t) {
    aug.marginals_[t] = flow.state_marginal(t, aug.n_s_);
  }

  aug.stage_kernel_.resize(T + 1);
  aug.stage_cost_.resize(T + 1);
  aug.level_next_.resize(T + 1);
  double bt = 1.0;
  for (std::size_t t = 0; t <= T; ++t) {
    const MeanField& d = aug.marginals_[t];
    aug.stage_kernel_[t].resize(aug.n_s_ * aug.n_a_ * aug.n_s_);
    aug.stage_cost_[t].resize(aug.n_s_ * aug.n_a_);
    for (std::size_t s = 0; s < aug.n_s_; ++s) {
      for (std::size_t a = 0; a < aug.n_a_; ++a) {
        const std::vector<double> row = eval_transition(spec, s, a, d);
        double sum = 0.0;
        for (std::size_t s2 = 0; s2 < aug.n_s_; ++s2) {
          aug.stage_kernel_[t][(s * aug.n_a_ + a) * aug.n_s_ + s2] = row[s2];
          sum += row[s2];
        }
        if (std::abs(sum - 1.0) > 1e-12) {
          throw std::logic_error("build_augmented: kernel row is not stochastic");
        }
        aug.stage_cost_[t][s * aug.n_a_ + a] = eval_cost(spec, s, a, d);
      }
    }
    const std::size_t nl = aug.num_levels(t);
    aug.level_next_[t].resize(nl * aug.n_s_ * aug.n_a_);
    for (std::size_t li = 0; li < nl; ++li) {
      for (std::size_t s = 0; s < aug.n_s_; ++s) {
        for (std::size_t a = 0; a < aug.n_a_; ++a) {
          const double target =
              aug.levels_.levels[t][li] + bt * aug.stage_cost_[t][s * aug.n_a_ + a];
          const std::ptrdiff_t idx =
              CostLevelTable::find(aug.levels_.levels[t + 1], target);
          if (idx < 0) {
            // Levels were enumerated with the same arithmetic, so a miss
            // means the table and the kernel disagree.
            throw std::logic_error(
                "build_augmented: no matching cost level at stage " +
                std::to_string(t + 1));
          }
          aug.level_next_[t][(li * aug.n_s_ + s) * aug.n_a_ + a] =
              static_cast<std::size_t>(idx);
        }
      }
    }
    bt *= spec.beta;
  }

  aug.terminal_cost_.resize(aug.num_levels(T + 1));
  for (std::size_t li = 0; li < aug.num_levels(T + 1); ++li) {
    aug.terminal_cost_[li] = terminal_cost(aug.levels_.levels[T + 1][li],
                                           spec.lambda);
  }
  return aug;
}

double terminal_cost(double level, double lambda) {
  return std::exp(lambda * level);
}

double additive_cost_of_trajectory(
    const GameSpec& spec,
    const std::vector<std::pair<std::size_t, std::size_t>>& trajectory,
    const MeasureFlow& flow) {
  if (trajectory.size() != spec.horizon_T + 1) {
    throw std::invalid_argument(
        "additive_cost_of_trajectory: trajectory must have T+1 steps");
  }
  const AugmentedGame aug = build_augmented(spec, flow);

  double direct = 0.0;
  double bt = 1.0;
  std::size_t li = 0;  // stage-0 level set is exactly {0}
  for (std::size_t t = 0; t <= spec.horizon_T; ++t) {
    const auto [s, a] = trajectory[t];
    direct += bt * aug.stage_cost(t, s, a);
    li = aug.level_successor(t, li, s, a);
    bt *= spec.beta;
  }
  const double via_direct = terminal_cost(direct, spec.lambda);
  const double via_levels = aug.terminal_cost_at(li);
  if (std::abs(via_direct - via_levels) > 1e-12) {
    throw std::logic_error(
        "additive_cost_of_trajectory: direct and level-evolution routes "
        "disagree beyond 1e-12");
  }
  return via_direct;
}

}  // namespace rsmfg
