#pragma once

#include <cstddef>
#include <vector>

#include "rsmfg/game_spec.hpp"

namespace rsmfg {

// One atom of a stage distribution over augmented states: original state plus
// the accumulated discounted cost carried so far.
struct FlowAtom {
  std::size_t state;
  double level;
  double mass;
};

// Sequence of per-stage distributions over augmented states, t = 0..T+1.
// Stage 0 is pinned to kappa0 with level 0. Atoms are kept sorted by
// (state, level); within one state, distinct levels are more than
// kLevelMatchTol apart.
struct MeasureFlow {
  static constexpr double kLevelMatchTol = 1e-12;

  std::vector<std::vector<FlowAtom>> stages;

  std::size_t num_stages() const { return stages.size(); }

  MeanField state_marginal(std::size_t t, std::size_t num_states) const;
  double stage_mass(std::size_t t) const;
  void sort_stage(std::size_t t);
};

// Flow whose every stage is kappa0 with level 0. Used to seed the
// equilibrium iteration; its stage 0 is the required initial condition.
MeasureFlow constant_initial_flow(const GameSpec& spec);

// Convex combination (1 - weight_b) * a + weight_b * b. Atoms are matched at
// (state, level) with level tolerance kLevelMatchTol; stage 0 is copied from
// `a` verbatim to keep the initial condition exact. Atoms below mass_floor
// are dropped and the stage renormalized.
MeasureFlow blend_flows(const MeasureFlow& a, const MeasureFlow& b,
                        double weight_b, double mass_floor = 1e-15);

}  // namespace rsmfg
