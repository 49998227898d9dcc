#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rsmfg/game_spec.hpp"
#include "rsmfg/policy.hpp"
#include "rsmfg/solver.hpp"

namespace rsmfg {

struct SimOptions {
  std::size_t episodes = 1000;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

struct AgentCostStat {
  double mean = 0.0;
  double std_err = 0.0;
};

// Monte Carlo estimates from N-agent episodes. All draws come from
// counter-based streams keyed by (seed, episode, agent, stage, kind) and
// episodes are aggregated in fixed chunks, so the report is bit-identical
// for any thread count.
struct SimReport {
  std::uint64_t seed = 0;
  std::size_t num_agents = 0;
  std::size_t episodes = 0;
  std::vector<AgentCostStat> agent_costs;       // realized * exp-cost per agent
  std::vector<double> episode_costs_agent0;     // agent 0, indexed by episode
  std::vector<MeanField> meanfield_mean;        // per stage, mean over episodes
  // Filled when a reference flow is supplied: per-stage L1 distance between
  // the empirical state distribution and the reference marginal.
  std::vector<double> meanfield_l1_mean;
  std::vector<double> meanfield_l1_se;
};

// Plays `options.episodes` independent episodes of the N-agent game. Kernels
// and costs see the realized empirical state distribution of the episode at
// every stage, never a limit flow. `policies` has one entry per agent
// (pointers may repeat). Throws PolicyUndefined when a policy does not cover
// a realized observation history.
SimReport simulate(const GameSpec& spec,
                   const std::vector<const CompiledPolicy*>& policies,
                   const SimOptions& options,
                   const std::vector<MeanField>* reference_marginals = nullptr);

// Exact per-agent expected exp-costs by exhaustive enumeration of every joint
// outcome (initial states, observations, transitions) with realized empirical
// couplings. Throws CapExceeded when the outcome count exceeds `cap`.
std::vector<double> exact_cost_small(
    const GameSpec& spec, const std::vector<const CompiledPolicy*>& policies,
    std::size_t cap = 10000000);

struct DeviationStats {
  std::vector<double> per_stage_mean_l1;  // stages 0..T+1
  std::vector<double> per_stage_se;
  double overall_mean_l1 = 0.0;  // mean over stages
};

// Distance between the realized empirical state distribution and the
// equilibrium marginals when every agent plays pi_star.
DeviationStats meanfield_deviation(const GameSpec& spec,
                                   const CompiledPolicy& pi_star,
                                   const std::vector<MeanField>& reference,
                                   std::size_t num_agents,
                                   const SimOptions& options);

// Optimal policy against the frozen equilibrium flow with ties broken toward
// the highest action index: the strongest single-agent deviation the frozen
// flow admits, distinct from the equilibrium policy wherever ties exist.
// Indexed against the tree rebuilt from artifact.flow.
PolicyTree best_response_candidate(const GameSpec& spec,
                                   const EquilibriumArtifact& artifact);

struct CandidateEstimate {
  std::string id;
  double mean_cost = 0.0;
  double std_err = 0.0;
  double meanfield_l1 = 0.0;  // overall deviation in this candidate's run
};

struct NashGapReport {
  std::size_t num_agents = 0;
  std::size_t episodes = 0;
  std::uint64_t seed = 0;
  CandidateEstimate baseline;               // everyone plays pi_star
  std::vector<CandidateEstimate> candidates;  // agent 0 deviates
  // Lower bound on the best-response advantage over the finite candidate
  // set: max(0, baseline mean - min candidate mean).
  double gap = 0.0;
  double gap_ci_lo = 0.0;
  double gap_ci_hi = 0.0;
};

// Estimates the unilateral-deviation advantage of agent 0 with common random
// numbers across candidates and an episode-level paired bootstrap
// (1000 resamples) for the confidence interval.
NashGapReport nash_gap(
    const GameSpec& spec, const CompiledPolicy& pi_star,
    const std::vector<std::pair<std::string, const CompiledPolicy*>>& candidates,
    std::size_t num_agents, const SimOptions& options,
    const std::vector<MeanField>& reference_marginals);

// Deviation candidate set used by the command line: the frozen-flow best
// response, one constant policy per action, and `num_random` random tree
// policies.
std::vector<std::pair<std::string, CompiledPolicy>> default_deviation_candidates(
    const GameSpec& spec, const EquilibriumArtifact& artifact,
    std::uint64_t seed, std::size_t num_random = 1);

}  // namespace rsmfg
