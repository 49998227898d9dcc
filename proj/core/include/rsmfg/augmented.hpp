#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "rsmfg/flow.hpp"
#include "rsmfg/game_spec.hpp"

namespace rsmfg {

// Reachable accumulated discounted costs per stage, t = 0..T+1. Stage 0 is
// exactly {0}; stage t+1 is the deduplicated image of stage t under
// c -> c + beta^t * m(s,a,d_t). Lists are strictly increasing and any two
// entries of one list are more than kLevelTol apart.
struct CostLevelTable {
  static constexpr double kLevelTol = 1e-12;

  std::vector<std::vector<double>> levels;
  double bound = 0.0;  // horizon-aware cap on every level

  std::size_t num_stages() const { return levels.size(); }

  // Index of the entry within kLevelTol of value (nearest on ties), or -1.
  static std::ptrdiff_t find(const std::vector<double>& sorted, double value);
};

// Enumerates reachable cost levels for the game driven by the state marginals
// of `flow`. Throws CapExceeded when a stage would exceed max_levels_per_stage.
CostLevelTable enumerate_cost_levels(const GameSpec& spec,
                                     const MeasureFlow& flow,
                                     std::size_t max_levels_per_stage = 1000000);

// The additive-cost game equivalent to the risk-sensitive one: states are
// (original state, accumulated-cost level), stage costs vanish before the
// terminal stage, and the terminal cost is exp(lambda * level). Kernels and
// costs are frozen against the state marginals of the flow it was built from,
// so the solver rebuilds this object whenever the flow iterate changes.
//
// Self-contained by value: it copies everything it needs from the model.
class AugmentedGame {
 public:
  AugmentedGame() = default;

  std::size_t num_states() const { return n_s_; }
  std::size_t num_actions() const { return n_a_; }
  std::size_t num_observations() const { return n_y_; }
  double beta() const { return beta_; }
  double lambda() const { return lambda_; }
  std::size_t horizon_T() const { return horizon_T_; }
  // Stage indices run 0..T+1.
  std::size_t num_stages() const { return horizon_T_ + 2; }

  const CostLevelTable& levels() const { return levels_; }
  std::size_t num_levels(std::size_t t) const { return levels_.levels[t].size(); }
  double level_value(std::size_t t, std::size_t li) const {
    return levels_.levels[t][li];
  }
  std::size_t num_aug_states(std::size_t t) const {
    return n_s_ * num_levels(t);
  }

  std::size_t aug_id(std::size_t t, std::size_t s, std::size_t li) const {
    return s * num_levels(t) + li;
  }
  std::pair<std::size_t, std::size_t> decode(std::size_t t,
                                             std::size_t id) const {
    return {id / num_levels(t), id % num_levels(t)};
  }

  // Realized kernel q(s'|s,a,d_t) for t = 0..T.
  double kernel(std::size_t t, std::size_t s, std::size_t a,
                std::size_t s2) const {
    return stage_kernel_[t][(s * n_a_ + a) * n_s_ + s2];
  }
  // Realized one-stage cost m(s,a,d_t) for t = 0..T.
  double stage_cost(std::size_t t, std::size_t s, std::size_t a) const {
    return stage_cost_[t][s * n_a_ + a];
  }
  // Level index at stage t+1 reached from level li under (s,a) at stage t.
  std::size_t level_successor(std::size_t t, std::size_t li, std::size_t s,
                              std::size_t a) const {
    return level_next_[t][(li * n_s_ + s) * n_a_ + a];
  }
  // Observation kernel; the cost coordinate is unobserved.
  double observation(std::size_t s, std::size_t y) const {
    return observation_kernel_[s * n_y_ + y];
  }
  double terminal_cost_at(std::size_t li) const {
    return terminal_cost_[li];
  }

  const std::vector<double>& initial_distribution() const { return kappa0_; }
  // State marginal d_t the stage-t kernel and cost were built against.
  const MeanField& marginal(std::size_t t) const { return marginals_[t]; }
  const MeasureFlow& built_from() const { return built_from_; }

  friend AugmentedGame build_augmented(const GameSpec& spec,
                                       const MeasureFlow& flow,
                                       std::size_t level_cap);

 private:
  std::size_t n_s_ = 0, n_a_ = 0, n_y_ = 0;
  double beta_ = 1.0, lambda_ = 1.0;
  std::size_t horizon_T_ = 0;
  std::vector<double> kappa0_;
  std::vector<double> observation_kernel_;
  CostLevelTable levels_;
  std::vector<std::vector<double>> stage_kernel_;  // [t][(s,a,s')], t = 0..T
  std::vector<std::vector<double>> stage_cost_;    // [t][(s,a)],    t = 0..T
  std::vector<std::vector<std::size_t>> level_next_;  // [t][(li,s,a)]
  std::vector<double> terminal_cost_;              // exp(lambda * level), t=T+1
  std::vector<MeanField> marginals_;               // d_t, t = 0..T+1
  MeasureFlow built_from_;
};

AugmentedGame build_augmented(const GameSpec& spec, const MeasureFlow& flow,
                              std::size_t level_cap = 1000000);

// exp(lambda * level).
double terminal_cost(double level, double lambda);

// Risk-sensitive cost of one full trajectory ((s_0,a_0),...,(s_T,a_T)) under
// the state marginals of `flow`, computed both directly and through the
// augmented level evolution; the two routes must agree to 1e-12.
double additive_cost_of_trajectory(
    const GameSpec& spec,
    const std::vector<std::pair<std::size_t, std::size_t>>& trajectory,
    const MeasureFlow& flow);

}  // namespace rsmfg
