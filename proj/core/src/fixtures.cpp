#include "rsmfg/fixtures.hpp"

namespace rsmfg {

GameSpec toy_a() {
  GameSpec spec;
  spec.name = "TOY-A";
  spec.states = {"s0", "s1"};
  spec.actions = {"a0", "a1"};
  spec.observations = {"y0", "y1"};
  // q(s'|s,a) = 1{s' = a} regardless of the current state.
  spec.transition_base = {
      1, 0, 0, 1,   // from s0: a0 -> s0, a1 -> s1
      1, 0, 0, 1,   // from s1
  };
  spec.observation_kernel = {
      1, 0,
      0, 1,
  };
  spec.cost_base = {
      0, 0,
      1, 1,
  };
  // m(s,a,d) = cost_base + 0.5 * d(s1)
  spec.cost_couple = {
      0, 0.5, 0, 0.5,
      0, 0.5, 0, 0.5,
  };
  spec.beta = 1.0;
  spec.lambda = 1.0;
  spec.horizon_T = 1;
  spec.kappa0 = {1, 0};
  return spec;
}

GameSpec toy_b() {
  GameSpec spec = toy_a();
  spec.name = "TOY-B";
  spec.observation_kernel = {
      0.8, 0.2,
      0.2, 0.8,
  };
  // Vertex kernel for s0 is the base kernel; the one for s1 moves 0.2 of the
  // mass toward s1.
  spec.transition_couple = {
      // k = s0
      1, 0, 0, 1,
      1, 0, 0, 1,
      // k = s1
      0.8, 0.2, 0, 1,
      0.8, 0.2, 0, 1,
  };
  return spec;
}

}  // namespace rsmfg
