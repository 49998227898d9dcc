#include "rsmfg/model_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "rsmfg/augmented.hpp"
#include "rsmfg/belief.hpp"
#include "rsmfg/errors.hpp"

namespace rsmfg {

namespace {

using nlohmann::json;

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void flatten_into(const json& node, const std::vector<std::size_t>& dims,
                  std::size_t depth, const std::string& what,
                  std::vector<double>* out) {
  if (depth == dims.size()) {
    if (!node.is_number()) {
      throw IoError(what + ": expected a number at depth " +
                    std::to_string(depth));
    }
    out->push_back(node.get<double>());
    return;
  }
  if (!node.is_array() || node.size() != dims[depth]) {
    throw IoError(what + ": expected an array of length " +
                  std::to_string(dims[depth]) + " at depth " +
                  std::to_string(depth));
  }
  for (const json& child : node) {
    flatten_into(child, dims, depth + 1, what, out);
  }
}

std::vector<double> flatten(const json& node,
                            const std::vector<std::size_t>& dims,
                            const std::string& what) {
  std::vector<double> out;
  std::size_t total = 1;
  for (std::size_t d : dims) total *= d;
  out.reserve(total);
  flatten_into(node, dims, 0, what, &out);
  return out;
}

json nest(const std::vector<double>& flat, const std::vector<std::size_t>& dims,
          std::size_t depth, std::size_t* offset) {
  if (depth == dims.size()) return flat[(*offset)++];
  json arr = json::array();
  for (std::size_t i = 0; i < dims[depth]; ++i) {
    arr.push_back(nest(flat, dims, depth + 1, offset));
  }
  return arr;
}

json nest(const std::vector<double>& flat,
          const std::vector<std::size_t>& dims) {
  std::size_t offset = 0;
  return nest(flat, dims, 0, &offset);
}

// One-time exact renormalization of rows that text round-trips perturbed by
// last-ulp noise; rows further than 1e-12 from mass 1 are left for
// validate_spec to flag.
void renormalize_rows(std::vector<double>* flat, std::size_t row_len) {
  if (row_len == 0) return;
  for (std::size_t begin = 0; begin + row_len <= flat->size();
       begin += row_len) {
    double sum = 0.0;
    bool nonneg = true;
    for (std::size_t i = 0; i < row_len; ++i) {
      sum += (*flat)[begin + i];
      nonneg = nonneg && (*flat)[begin + i] >= 0.0;
    }
    if (nonneg && sum != 1.0 && std::abs(sum - 1.0) <= 1e-12) {
      for (std::size_t i = 0; i < row_len; ++i) (*flat)[begin + i] /= sum;
    }
  }
}

std::vector<std::string> string_list(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) {
    throw IoError(what + ": expected a nonempty array of strings");
  }
  std::vector<std::string> out;
  for (const json& v : j) {
    if (!v.is_string()) throw IoError(what + ": expected strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

const json& require(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) {
    throw IoError(std::string("missing required key '") + key + "'");
  }
  return *it;
}

std::size_t label_to_index(const std::vector<std::string>& labels,
                           const std::string& label, const char* what) {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == label) return i;
  }
  throw IoError(std::string("unknown ") + what + " label '" + label + "'");
}

}  // namespace

GameSpec model_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw IoError(std::string("model file is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw IoError("model file must hold a JSON object");

  GameSpec spec;
  try {
    spec.states = string_list(require(j, "states"), "states");
    spec.actions = string_list(require(j, "actions"), "actions");
    spec.observations = string_list(require(j, "observations"), "observations");
    const std::size_t ns = spec.states.size();
    const std::size_t na = spec.actions.size();
    const std::size_t ny = spec.observations.size();

    spec.transition_base =
        flatten(require(j, "transition_base"), {ns, na, ns}, "transition_base");
    if (j.contains("transition_couple")) {
      spec.transition_couple = flatten(j["transition_couple"], {ns, ns, na, ns},
                                       "transition_couple");
    }
    spec.observation_kernel =
        flatten(require(j, "observation_kernel"), {ns, ny}, "observation_kernel");
    spec.cost_base = flatten(require(j, "cost_base"), {ns, na}, "cost_base");
    if (j.contains("cost_couple")) {
      spec.cost_couple = flatten(j["cost_couple"], {ns, na, ns}, "cost_couple");
    }
    spec.beta = require(j, "beta").get<double>();
    spec.lambda = require(j, "lambda").get<double>();
    const double horizon = require(j, "horizon_T").get<double>();
    if (horizon < 0 || horizon != std::floor(horizon)) {
      throw IoError("horizon_T must be a nonnegative integer");
    }
    spec.horizon_T = static_cast<std::size_t>(horizon);
    spec.kappa0 = flatten(require(j, "kappa0"), {ns}, "kappa0");
    if (j.contains("name")) spec.name = j["name"].get<std::string>();
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed model file: ") + e.what());
  }

  renormalize_rows(&spec.transition_base, spec.num_states());
  renormalize_rows(&spec.transition_couple, spec.num_states());
  renormalize_rows(&spec.observation_kernel, spec.num_observations());
  renormalize_rows(&spec.kappa0, spec.num_states());
  return spec;
}

GameSpec load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return model_from_json_text(buffer.str());
}

std::string model_to_json_text(const GameSpec& spec) {
  const std::size_t ns = spec.num_states();
  const std::size_t na = spec.num_actions();
  const std::size_t ny = spec.num_observations();
  json j;
  if (!spec.name.empty()) j["name"] = spec.name;
  j["states"] = spec.states;
  j["actions"] = spec.actions;
  j["observations"] = spec.observations;
  j["transition_base"] = nest(spec.transition_base, {ns, na, ns});
  if (spec.has_transition_coupling()) {
    j["transition_couple"] = nest(spec.transition_couple, {ns, ns, na, ns});
  }
  j["observation_kernel"] = nest(spec.observation_kernel, {ns, ny});
  j["cost_base"] = nest(spec.cost_base, {ns, na});
  if (spec.has_cost_coupling()) {
    j["cost_couple"] = nest(spec.cost_couple, {ns, na, ns});
  }
  j["beta"] = spec.beta;
  j["lambda"] = spec.lambda;
  j["horizon_T"] = spec.horizon_T;
  j["kappa0"] = spec.kappa0;
  return j.dump(2) + "\n";
}

void save_model(const GameSpec& spec, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write model file '" + path + "'");
  out << model_to_json_text(spec);
}

std::string spec_hash(const GameSpec& spec) {
  const std::string text = model_to_json_text(spec);
  std::uint64_t hash = 0xCBF29CE484222325ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001B3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(hash));
  return buf;
}

void save_equilibrium(const GameSpec& spec, const EquilibriumArtifact& artifact,
                      const std::string& path) {
  const AugmentedGame aug = build_augmented(spec, artifact.flow);
  const BeliefTree tree = expand_tree(aug);
  json j;
  j["policy"] =
      policy_to_history_map(tree, artifact.policy, spec.observations,
                            spec.actions);
  json flow = json::array();
  for (const auto& stage : artifact.flow.stages) {
    json stage_json = json::array();
    for (const FlowAtom& atom : stage) {
      stage_json.push_back({{"state", spec.states[atom.state]},
                            {"level", atom.level},
                            {"mass", atom.mass}});
    }
    flow.push_back(std::move(stage_json));
  }
  j["flow"] = std::move(flow);
  j["value"] = artifact.value;
  j["nce_residual"] = artifact.nce_residual;
  j["optimality_gap"] = artifact.optimality_gap;
  j["iterations"] = artifact.iterations;
  j["converged"] = artifact.converged;
  j["spec_hash"] = spec_hash(spec);
  std::ofstream out(path);
  if (!out) throw IoError("cannot write equilibrium file '" + path + "'");
  out << j.dump(2) << "\n";
}

LoadedEquilibrium load_equilibrium(const std::string& path,
                                   const GameSpec& spec) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open equilibrium file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw IoError(std::string("equilibrium file is not valid JSON: ") +
                  e.what());
  }
  LoadedEquilibrium eq;
  try {
    for (const auto& [key, value] : require(j, "policy").items()) {
      eq.policy[key] = value.get<std::string>();
    }
    const json& flow = require(j, "flow");
    eq.flow.stages.resize(flow.size());
    for (std::size_t t = 0; t < flow.size(); ++t) {
      for (const json& atom : flow[t]) {
        eq.flow.stages[t].push_back(
            {label_to_index(spec.states, atom.at("state").get<std::string>(),
                            "state"),
             atom.at("level").get<double>(), atom.at("mass").get<double>()});
      }
      eq.flow.sort_stage(t);
    }
    eq.value = require(j, "value").get<double>();
    eq.nce_residual = require(j, "nce_residual").get<double>();
    eq.optimality_gap = require(j, "optimality_gap").get<double>();
    eq.iterations = require(j, "iterations").get<std::size_t>();
    eq.converged = require(j, "converged").get<bool>();
    eq.spec_hash = require(j, "spec_hash").get<std::string>();
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed equilibrium file: ") + e.what());
  }
  return eq;
}

CompiledPolicy compile_loaded_policy(const LoadedEquilibrium& eq,
                                     const GameSpec& spec) {
  return compile_history_map(eq.policy, spec.observations, spec.actions);
}

double evaluate_loaded_policy(const GameSpec& spec,
                              const LoadedEquilibrium& eq) {
  const AugmentedGame aug = build_augmented(spec, eq.flow);
  const BeliefTree tree = expand_tree(aug);
  PolicyTree policy;
  policy.action_by_node.resize(tree.num_nodes());
  for (std::size_t id = 0; id < tree.num_nodes(); ++id) {
    const std::string key =
        tree.history_key(id, spec.observations, spec.actions);
    auto it = eq.policy.find(key);
    if (it == eq.policy.end()) {
      throw IoError("equilibrium policy has no entry for history '" + key +
                    "'");
    }
    policy.action_by_node[id] =
        label_to_index(spec.actions, it->second, "action");
  }
  return evaluate_policy(aug, tree, policy);
}

std::string sweep_csv_text(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "N,policy,mean_cost,std_err,gap,gap_ci_lo,gap_ci_hi,meanfield_l1\n";
  for (const SweepRow& row : rows) {
    out << row.num_agents << ',' << row.policy << ',' << fmt17(row.mean_cost)
        << ',' << fmt17(row.std_err) << ',' << fmt17(row.gap) << ','
        << fmt17(row.gap_ci_lo) << ',' << fmt17(row.gap_ci_hi) << ','
        << fmt17(row.meanfield_l1) << '\n';
  }
  return out.str();
}

void write_sweep_csv(const std::vector<SweepRow>& rows,
                     const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write CSV file '" + path + "'");
  out << sweep_csv_text(rows);
}

}  // namespace rsmfg
