// Seeded random instance generators for property tests.
#pragma once

#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "rsmfg/flow.hpp"
#include "rsmfg/game_spec.hpp"
#include "rsmfg/policy.hpp"

namespace testsupport {

struct SpecShape {
  std::size_t n_s = 2;
  std::size_t n_a = 2;
  std::size_t n_y = 2;
  std::size_t horizon_T = 1;
  bool couple_q = false;
  bool couple_m = false;
  double beta = 1.0;
  double lambda = 1.0;
};

inline std::vector<double> random_simplex(std::mt19937_64& rng,
                                          std::size_t n) {
  std::exponential_distribution<double> expo(1.0);
  std::vector<double> v(n);
  double sum = 0.0;
  for (double& x : v) {
    x = expo(rng) + 1e-3;  // keep full support
    sum += x;
  }
  for (double& x : v) x /= sum;
  return v;
}

inline rsmfg::GameSpec random_spec(std::mt19937_64& rng,
                                   const SpecShape& shape) {
  rsmfg::GameSpec spec;
  spec.name = "random";
  for (std::size_t i = 0; i < shape.n_s; ++i) {
    spec.states.push_back("s" + std::to_string(i));
  }
  for (std::size_t i = 0; i < shape.n_a; ++i) {
    spec.actions.push_back("a" + std::to_string(i));
  }
  for (std::size_t i = 0; i < shape.n_y; ++i) {
    spec.observations.push_back("y" + std::to_string(i));
  }
  const std::size_t ns = shape.n_s, na = shape.n_a, ny = shape.n_y;
  spec.transition_base.reserve(ns * na * ns);
  for (std::size_t i = 0; i < ns * na; ++i) {
    for (double v : random_simplex(rng, ns)) spec.transition_base.push_back(v);
  }
  if (shape.couple_q) {
    spec.transition_couple.reserve(ns * ns * na * ns);
    for (std::size_t i = 0; i < ns * ns * na; ++i) {
      for (double v : random_simplex(rng, ns)) {
        spec.transition_couple.push_back(v);
      }
    }
  }
  spec.observation_kernel.reserve(ns * ny);
  for (std::size_t i = 0; i < ns; ++i) {
    for (double v : random_simplex(rng, ny)) {
      spec.observation_kernel.push_back(v);
    }
  }
  std::uniform_real_distribution<double> cost(0.0, 2.0);
  spec.cost_base.reserve(ns * na);
  for (std::size_t i = 0; i < ns * na; ++i) spec.cost_base.push_back(cost(rng));
  if (shape.couple_m) {
    spec.cost_couple.reserve(ns * na * ns);
    for (std::size_t s = 0; s < ns; ++s) {
      for (std::size_t a = 0; a < na; ++a) {
        const double base = spec.cost_base[s * na + a];
        std::uniform_real_distribution<double> delta(-base, 1.0);
        for (std::size_t k = 0; k < ns; ++k) {
          spec.cost_couple.push_back(delta(rng));
        }
      }
    }
  }
  spec.beta = shape.beta;
  spec.lambda = shape.lambda;
  spec.horizon_T = shape.horizon_T;
  spec.kappa0 = random_simplex(rng, ns);
  return spec;
}

// Stage 0 is kappa0 at level 0; later stages carry random state marginals,
// also at level 0. Only the marginals matter when freezing a game.
inline rsmfg::MeasureFlow random_flat_flow(std::mt19937_64& rng,
                                           const rsmfg::GameSpec& spec) {
  rsmfg::MeasureFlow flow;
  flow.stages.resize(spec.horizon_T + 2);
  for (std::size_t s = 0; s < spec.num_states(); ++s) {
    if (spec.kappa0[s] > 0.0) flow.stages[0].push_back({s, 0.0, spec.kappa0[s]});
  }
  for (std::size_t t = 1; t < flow.num_stages(); ++t) {
    const std::vector<double> marginal = random_simplex(rng, spec.num_states());
    for (std::size_t s = 0; s < spec.num_states(); ++s) {
      flow.stages[t].push_back({s, 0.0, marginal[s]});
    }
  }
  return flow;
}

inline rsmfg::ObservationMapPolicy random_obs_policy(std::mt19937_64& rng,
                                                     std::size_t n_y,
                                                     std::size_t n_a,
                                                     std::size_t horizon_T) {
  rsmfg::ObservationMapPolicy policy;
  policy.num_observations = n_y;
  policy.actions_by_stage.resize(horizon_T + 1);
  std::uniform_int_distribution<std::size_t> pick(0, n_a - 1);
  std::size_t histories = 1;
  for (std::size_t t = 0; t <= horizon_T; ++t) {
    histories *= n_y;
    policy.actions_by_stage[t].resize(histories);
    for (auto& a : policy.actions_by_stage[t]) a = pick(rng);
  }
  return policy;
}

}  // namespace testsupport
