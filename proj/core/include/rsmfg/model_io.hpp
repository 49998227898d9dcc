#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "rsmfg/flow.hpp"
#include "rsmfg/game_spec.hpp"
#include "rsmfg/policy.hpp"
#include "rsmfg/solver.hpp"

namespace rsmfg {

// Model files are JSON with keys "states", "actions", "observations",
// "transition_base", "transition_couple" (optional), "observation_kernel",
// "cost_base", "cost_couple" (optional), "beta", "lambda", "horizon_T",
// "kappa0", and an optional "name". Probability rows within 1e-12 of mass 1
// are renormalized exactly once at load; everything else is left for
// validate_spec to flag.
GameSpec load_model(const std::string& path);
GameSpec model_from_json_text(const std::string& text);
std::string model_to_json_text(const GameSpec& spec);
void save_model(const GameSpec& spec, const std::string& path);

// FNV-1a over the canonical serialization; binds equilibrium files to the
// model they were solved from.
std::string spec_hash(const GameSpec& spec);

void save_equilibrium(const GameSpec& spec, const EquilibriumArtifact& artifact,
                      const std::string& path);

struct LoadedEquilibrium {
  std::map<std::string, std::string> policy;  // history key -> action label
  MeasureFlow flow;
  double value = 0.0;
  double nce_residual = 0.0;
  double optimality_gap = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  std::string spec_hash;
};

LoadedEquilibrium load_equilibrium(const std::string& path,
                                   const GameSpec& spec);

CompiledPolicy compile_loaded_policy(const LoadedEquilibrium& eq,
                                     const GameSpec& spec);

// Forward evaluation of a loaded (history-keyed) policy on the tree rebuilt
// from the loaded flow; reproduces the stored value.
double evaluate_loaded_policy(const GameSpec& spec,
                              const LoadedEquilibrium& eq);

struct SweepRow {
  std::size_t num_agents = 0;
  std::string policy;
  double mean_cost = 0.0;
  double std_err = 0.0;
  double gap = 0.0;
  double gap_ci_lo = 0.0;
  double gap_ci_hi = 0.0;
  double meanfield_l1 = 0.0;
};

// Header: N,policy,mean_cost,std_err,gap,gap_ci_lo,gap_ci_hi,meanfield_l1
// Numbers use 17 significant digits so files are byte-stable across runs.
std::string sweep_csv_text(const std::vector<SweepRow>& rows);
void write_sweep_csv(const std::vector<SweepRow>& rows,
                     const std::string& path);

}  // namespace rsmfg
