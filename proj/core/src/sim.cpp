#include "rsmfg/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "rsmfg/errors.hpp"
#include "rsmfg/rng.hpp"

namespace rsmfg {

namespace {

// Fixed chunk size decouples aggregation order from the thread count.
constexpr std::size_t kChunkEpisodes = 64;

void run_chunks(std::size_t n_chunks, std::size_t threads,
                const std::function<void(std::size_t)>& body) {
  threads = std::max<std::size_t>(1, std::min(threads, n_chunks));
  if (threads == 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) body(c);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mutex;
  for (std::size_t w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t c = next.fetch_add(1);
        if (c >= n_chunks) return;
        try {
          body(c);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

struct ChunkAccum {
  std::vector<double> cost_sum;     // per agent
  std::vector<double> cost_sumsq;   // per agent
  std::vector<double> field_sum;    // [stage * n_s + s]
  std::vector<double> l1_sum;       // per stage
  std::vector<double> l1_sumsq;     // per stage
};

struct EpisodeWorkspace {
  std::vector<std::size_t> state;
  std::vector<std::ptrdiff_t> cursor;
  std::vector<double> cost;
  std::vector<double> field;                 // current empirical distribution
  std::vector<std::vector<double>> kernels;  // per (s, a) realized rows
  std::vector<double> costs_sa;              // per (s, a) realized cost
};

void run_episode(const GameSpec& spec,
                 const std::vector<const CompiledPolicy*>& policies,
                 std::uint64_t seed, std::size_t episode,
                 EpisodeWorkspace* ws, std::vector<double>* out_fields) {
  const std::size_t N = policies.size();
  const std::size_t ns = spec.num_states();
  const std::size_t na = spec.num_actions();
  const std::size_t T = spec.horizon_T;

  ws->state.resize(N);
  ws->cursor.resize(N);
  ws->cost.assign(N, 0.0);
  for (std::size_t i = 0; i < N; ++i) {
    CounterRng rng(seed, episode, i, 0,
                   static_cast<std::uint64_t>(DrawKind::initial_state));
    ws->state[i] = sample_index(spec.kappa0, rng.next_uniform());
  }

  MeanField d;
  double bt = 1.0;
  for (std::size_t t = 0; t <= T; ++t) {
    d = empirical_distribution(ws->state, ns);
    std::copy(d.dist.begin(), d.dist.end(),
              out_fields->begin() + static_cast<std::ptrdiff_t>(t * ns));

    ws->kernels.assign(ns * na, {});
    ws->costs_sa.assign(ns * na, 0.0);
    for (std::size_t s = 0; s < ns; ++s) {
      for (std::size_t a = 0; a < na; ++a) {
        ws->kernels[s * na + a] = eval_transition(spec, s, a, d);
        ws->costs_sa[s * na + a] = eval_cost(spec, s, a, d);
      }
    }

    for (std::size_t i = 0; i < N; ++i) {
      CounterRng rng(seed, episode, i, t,
                     static_cast<std::uint64_t>(DrawKind::observation));
      const std::size_t y = sample_index(
          &spec.observation_kernel[ws->state[i] * spec.num_observations()],
          spec.num_observations(), rng.next_uniform());
      ws->cursor[i] = t == 0 ? policies[i]->start(y)
                             : policies[i]->advance(ws->cursor[i], y);
      if (ws->cursor[i] < 0) {
        throw PolicyUndefined("policy of agent " + std::to_string(i) +
                              " is undefined on the history realized at stage " +
                              std::to_string(t) + " of episode " +
                              std::to_string(episode));
      }
      const std::size_t a = policies[i]->action_at(ws->cursor[i]);
      ws->cost[i] += bt * ws->costs_sa[ws->state[i] * na + a];
      CounterRng trng(seed, episode, i, t,
                      static_cast<std::uint64_t>(DrawKind::transition));
      ws->state[i] = sample_index(ws->kernels[ws->state[i] * na + a],
                                  trng.next_uniform());
    }
    bt *= spec.beta;
  }
  d = empirical_distribution(ws->state, ns);
  std::copy(d.dist.begin(), d.dist.end(),
            out_fields->begin() + static_cast<std::ptrdiff_t>((T + 1) * ns));
}

}  // namespace

SimReport simulate(const GameSpec& spec,
                   const std::vector<const CompiledPolicy*>& policies,
                   const SimOptions& options,
                   const std::vector<MeanField>* reference_marginals) {
  const std::size_t N = policies.size();
  if (N == 0) throw std::invalid_argument("simulate: need at least one agent");
  if (options.episodes == 0) {
    throw std::invalid_argument("simulate: need at least one episode");
  }
  const std::size_t ns = spec.num_states();
  const std::size_t stages = spec.horizon_T + 2;
  const std::size_t n_chunks =
      (options.episodes + kChunkEpisodes - 1) / kChunkEpisodes;

  std::vector<ChunkAccum> chunks(n_chunks);
  std::vector<double> agent0_costs(options.episodes, 0.0);

  run_chunks(n_chunks, options.threads, [&](std::size_t c) {
    ChunkAccum& acc = chunks[c];
    acc.cost_sum.assign(N, 0.0);
    acc.cost_sumsq.assign(N, 0.0);
    acc.field_sum.assign(stages * ns, 0.0);
    acc.l1_sum.assign(stages, 0.0);
    acc.l1_sumsq.assign(stages, 0.0);
    EpisodeWorkspace ws;
    std::vector<double> fields(stages * ns, 0.0);
    const std::size_t begin = c * kChunkEpisodes;
    const std::size_t end = std::min(options.episodes, begin + kChunkEpisodes);
    for (std::size_t e = begin; e < end; ++e) {
      run_episode(spec, policies, options.seed, e, &ws, &fields);
      for (std::size_t i = 0; i < N; ++i) {
        const double w = std::exp(spec.lambda * ws.cost[i]);
        acc.cost_sum[i] += w;
        acc.cost_sumsq[i] += w * w;
        if (i == 0) agent0_costs[e] = w;
      }
      for (std::size_t k = 0; k < stages * ns; ++k) {
        acc.field_sum[k] += fields[k];
      }
      if (reference_marginals != nullptr) {
        for (std::size_t t = 0; t < stages; ++t) {
          double l1 = 0.0;
          for (std::size_t s = 0; s < ns; ++s) {
            l1 += std::abs(fields[t * ns + s] -
                           (*reference_marginals)[t].dist[s]);
          }
          acc.l1_sum[t] += l1;
          acc.l1_sumsq[t] += l1 * l1;
        }
      }
    }
  });

  SimReport report;
  report.seed = options.seed;
  report.num_agents = N;
  report.episodes = options.episodes;
  report.episode_costs_agent0 = std::move(agent0_costs);

  const double n = static_cast<double>(options.episodes);
  std::vector<double> cost_sum(N, 0.0), cost_sumsq(N, 0.0);
  std::vector<double> field_sum(stages * ns, 0.0);
  std::vector<double> l1_sum(stages, 0.0), l1_sumsq(stages, 0.0);
  for (const ChunkAccum& acc : chunks) {
    for (std::size_t i = 0; i < N; ++i) {
      cost_sum[i] += acc.cost_sum[i];
      cost_sumsq[i] += acc.cost_sumsq[i];
    }
    for (std::size_t k = 0; k < stages * ns; ++k) field_sum[k] += acc.field_sum[k];
    for (std::size_t t = 0; t < stages; ++t) {
      l1_sum[t] += acc.l1_sum[t];
      l1_sumsq[t] += acc.l1_sumsq[t];
    }
  }
  report.agent_costs.resize(N);
  for (std::size_t i = 0; i < N; ++i) {
    const double mean = cost_sum[i] / n;
    const double var =
        n > 1 ? std::max(0.0, (cost_sumsq[i] - n * mean * mean) / (n - 1)) : 0.0;
    report.agent_costs[i] = {mean, std::sqrt(var / n)};
  }
  report.meanfield_mean.resize(stages);
  for (std::size_t t = 0; t < stages; ++t) {
    report.meanfield_mean[t].dist.resize(ns);
    for (std::size_t s = 0; s < ns; ++s) {
      report.meanfield_mean[t].dist[s] = field_sum[t * ns + s] / n;
    }
  }
  if (reference_marginals != nullptr) {
    report.meanfield_l1_mean.resize(stages);
    report.meanfield_l1_se.resize(stages);
    for (std::size_t t = 0; t < stages; ++t) {
      const double mean = l1_sum[t] / n;
      const double var =
          n > 1 ? std::max(0.0, (l1_sumsq[t] - n * mean * mean) / (n - 1)) : 0.0;
      report.meanfield_l1_mean[t] = mean;
      report.meanfield_l1_se[t] = std::sqrt(var / n);
    }
  }
  return report;
}

namespace {

class ExactEnumerator {
 public:
  ExactEnumerator(const GameSpec& spec,
                  const std::vector<const CompiledPolicy*>& policies)
      : spec_(spec), policies_(policies), N_(policies.size()) {
    result_.assign(N_, 0.0);
    state_.resize(N_);
    cursor_.resize(N_);
    cost_.assign(N_, 0.0);
    rows_.resize(spec_.horizon_T + 1);
    discount_.resize(spec_.horizon_T + 1);
    double bt = 1.0;
    for (std::size_t t = 0; t <= spec_.horizon_T; ++t) {
      discount_[t] = bt;
      bt *= spec_.beta;
    }
  }

  std::vector<double> run() {
    enum_initial(0, 1.0);
    return result_;
  }

 private:
  void enum_initial(std::size_t i, double prob) {
    if (prob == 0.0) return;
    if (i == N_) {
      stage(0, prob);
      return;
    }
    for (std::size_t s = 0; s < spec_.num_states(); ++s) {
      if (spec_.kappa0[s] == 0.0) continue;
      state_[i] = s;
      enum_initial(i + 1, prob * spec_.kappa0[s]);
    }
  }

  void stage(std::size_t t, double prob) {
    const MeanField d = empirical_distribution(state_, spec_.num_states());
    enum_obs(t, 0, prob, d);
  }

  void enum_obs(std::size_t t, std::size_t i, double prob, const MeanField& d) {
    if (i == N_) {
      after_obs(t, prob, d);
      return;
    }
    const std::ptrdiff_t saved = cursor_[i];
    for (std::size_t y = 0; y < spec_.num_observations(); ++y) {
      const double p = spec_.obs(state_[i], y);
      if (p == 0.0) continue;
      cursor_[i] = t == 0 ? policies_[i]->start(y)
                          : policies_[i]->advance(saved, y);
      if (cursor_[i] < 0) {
        throw PolicyUndefined("policy of agent " + std::to_string(i) +
                              " is undefined on an enumerated history at stage " +
                              std::to_string(t));
      }
      enum_obs(t, i + 1, prob * p, d);
    }
    cursor_[i] = saved;
  }

  void after_obs(std::size_t t, double prob, const MeanField& d) {
    const std::vector<double> saved_cost = cost_;
    std::vector<std::size_t> action(N_);
    for (std::size_t i = 0; i < N_; ++i) {
      action[i] = policies_[i]->action_at(cursor_[i]);
      cost_[i] += discount_[t] * eval_cost(spec_, state_[i], action[i], d);
    }
    if (t == spec_.horizon_T) {
      for (std::size_t i = 0; i < N_; ++i) {
        result_[i] += prob * std::exp(spec_.lambda * cost_[i]);
      }
    } else {
      // Transition rows must use pre-transition states for every agent.
      rows_[t].resize(N_);
      for (std::size_t i = 0; i < N_; ++i) {
        rows_[t][i] = eval_transition(spec_, state_[i], action[i], d);
      }
      const std::vector<std::size_t> saved_state = state_;
      enum_trans(t, 0, prob);
      state_ = saved_state;
    }
    cost_ = saved_cost;
  }

  void enum_trans(std::size_t t, std::size_t i, double prob) {
    if (i == N_) {
      stage(t + 1, prob);
      return;
    }
    for (std::size_t s2 = 0; s2 < spec_.num_states(); ++s2) {
      const double p = rows_[t][i][s2];
      if (p == 0.0) continue;
      state_[i] = s2;
      enum_trans(t, i + 1, prob * p);
    }
  }

  const GameSpec& spec_;
  const std::vector<const CompiledPolicy*>& policies_;
  const std::size_t N_;
  std::vector<double> result_;
  std::vector<std::size_t> state_;
  std::vector<std::ptrdiff_t> cursor_;
  std::vector<double> cost_;
  std::vector<std::vector<std::vector<double>>> rows_;  // [t][agent][s']
  std::vector<double> discount_;
};

}  // namespace

std::vector<double> exact_cost_small(
    const GameSpec& spec, const std::vector<const CompiledPolicy*>& policies,
    std::size_t cap) {
  const double N = static_cast<double>(policies.size());
  double count = std::pow(static_cast<double>(spec.num_states()), N);
  for (std::size_t t = 0; t <= spec.horizon_T; ++t) {
    count *= std::pow(static_cast<double>(spec.num_observations()), N);
    if (t < spec.horizon_T) {
      count *= std::pow(static_cast<double>(spec.num_states()), N);
    }
    if (count > static_cast<double>(cap)) {
      throw CapExceeded("exact_cost_small: joint outcome count " +
                        std::to_string(count) + " exceeds cap " +
                        std::to_string(cap));
    }
  }
  ExactEnumerator enumerator(spec, policies);
  return enumerator.run();
}

DeviationStats meanfield_deviation(const GameSpec& spec,
                                   const CompiledPolicy& pi_star,
                                   const std::vector<MeanField>& reference,
                                   std::size_t num_agents,
                                   const SimOptions& options) {
  const std::vector<const CompiledPolicy*> policies(num_agents, &pi_star);
  const SimReport report = simulate(spec, policies, options, &reference);
  DeviationStats stats;
  stats.per_stage_mean_l1 = report.meanfield_l1_mean;
  stats.per_stage_se = report.meanfield_l1_se;
  double sum = 0.0;
  for (double v : stats.per_stage_mean_l1) sum += v;
  stats.overall_mean_l1 =
      stats.per_stage_mean_l1.empty()
          ? 0.0
          : sum / static_cast<double>(stats.per_stage_mean_l1.size());
  return stats;
}

PolicyTree best_response_candidate(const GameSpec& spec,
                                   const EquilibriumArtifact& artifact) {
  const AugmentedGame aug = build_augmented(spec, artifact.flow);
  return solve_pomdp(aug, {}, TieBreak::highest_action).policy;
}

NashGapReport nash_gap(
    const GameSpec& spec, const CompiledPolicy& pi_star,
    const std::vector<std::pair<std::string, const CompiledPolicy*>>& candidates,
    std::size_t num_agents, const SimOptions& options,
    const std::vector<MeanField>& reference_marginals) {
  if (candidates.empty()) {
    throw std::invalid_argument("nash_gap: candidate list is empty");
  }
  NashGapReport report;
  report.num_agents = num_agents;
  report.episodes = options.episodes;
  report.seed = options.seed;

  const auto overall_l1 = [](const SimReport& r) {
    double sum = 0.0;
    for (double v : r.meanfield_l1_mean) sum += v;
    return r.meanfield_l1_mean.empty()
               ? 0.0
               : sum / static_cast<double>(r.meanfield_l1_mean.size());
  };

  std::vector<const CompiledPolicy*> policies(num_agents, &pi_star);
  const SimReport base = simulate(spec, policies, options, &reference_marginals);
  report.baseline = {"pi_star", base.agent_costs[0].mean,
                     base.agent_costs[0].std_err, overall_l1(base)};

  // Common random numbers: the deviating candidate only changes actions, so
  // every other draw stream coincides with the baseline's.
  std::vector<std::vector<double>> candidate_costs;
  for (const auto& [id, policy] : candidates) {
    policies[0] = policy;
    const SimReport run = simulate(spec, policies, options, &reference_marginals);
    report.candidates.push_back({id, run.agent_costs[0].mean,
                                 run.agent_costs[0].std_err, overall_l1(run)});
    candidate_costs.push_back(run.episode_costs_agent0);
  }

  double best_candidate = report.candidates[0].mean_cost;
  for (const auto& c : report.candidates) {
    best_candidate = std::min(best_candidate, c.mean_cost);
  }
  report.gap = std::max(0.0, report.baseline.mean_cost - best_candidate);

  // Paired bootstrap over episodes, same resample for every candidate.
  const std::size_t resamples = 1000;
  const std::size_t episodes = options.episodes;
  std::vector<double> gaps(resamples);
  for (std::size_t r = 0; r < resamples; ++r) {
    CounterRng rng(options.seed, r, 0, 0,
                   static_cast<std::uint64_t>(DrawKind::bootstrap));
    double base_sum = 0.0;
    std::vector<double> cand_sum(candidates.size(), 0.0);
    for (std::size_t e = 0; e < episodes; ++e) {
      const std::size_t idx = static_cast<std::size_t>(
          rng.next_uniform() * static_cast<double>(episodes));
      const std::size_t pick = std::min(idx, episodes - 1);
      base_sum += base.episode_costs_agent0[pick];
      for (std::size_t c = 0; c < candidates.size(); ++c) {
        cand_sum[c] += candidate_costs[c][pick];
      }
    }
    double best = cand_sum[0];
    for (double v : cand_sum) best = std::min(best, v);
    gaps[r] = std::max(0.0, (base_sum - best) / static_cast<double>(episodes));
  }
  std::sort(gaps.begin(), gaps.end());
  report.gap_ci_lo = gaps[static_cast<std::size_t>(0.025 * (resamples - 1))];
  report.gap_ci_hi = gaps[static_cast<std::size_t>(0.975 * (resamples - 1))];
  return report;
}

std::vector<std::pair<std::string, CompiledPolicy>> default_deviation_candidates(
    const GameSpec& spec, const EquilibriumArtifact& artifact,
    std::uint64_t seed, std::size_t num_random) {
  const AugmentedGame aug = build_augmented(spec, artifact.flow);
  const BeliefTree tree = expand_tree(aug);
  std::vector<std::pair<std::string, CompiledPolicy>> out;
  out.emplace_back("best_response",
                   compile_policy(tree, best_response_candidate(spec, artifact),
                                  spec.num_observations()));
  for (std::size_t a = 0; a < spec.num_actions(); ++a) {
    out.emplace_back("const_" + spec.actions[a],
                     constant_policy(a, spec.num_observations()));
  }
  for (std::size_t r = 0; r < num_random; ++r) {
    out.emplace_back(
        "random_" + std::to_string(r),
        compile_policy(tree,
                       random_policy_tree(tree, spec.num_actions(), seed, r),
                       spec.num_observations()));
  }
  return out;
}

}  // namespace rsmfg
