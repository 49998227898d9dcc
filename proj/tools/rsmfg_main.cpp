// Command line front end: validate | solve | simulate | nash-gap | horizon.
//
// Exit codes: 0 ok, 1 validation failure, 2 I/O or parse error,
// 3 solver did not converge, 4 size cap exceeded, 5 policy/model hash
// mismatch, 6 unsupported discount factor.

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rsmfg/errors.hpp"
#include "rsmfg/fixtures.hpp"
#include "rsmfg/model_io.hpp"
#include "rsmfg/sim.hpp"
#include "rsmfg/solver.hpp"

namespace {

enum ExitCode : int {
  kOk = 0,
  kInvalidModel = 1,
  kIoError = 2,
  kNotConverged = 3,
  kCapExceeded = 4,
  kHashMismatch = 5,
  kUnsupportedBeta = 6,
};

rsmfg::GameSpec load_valid_model(const std::string& path) {
  rsmfg::GameSpec spec = rsmfg::load_model(path);
  const rsmfg::ValidationReport report = rsmfg::validate_spec(spec);
  if (!report.ok()) {
    std::cerr << report.to_string();
    throw ExitCode::kInvalidModel;
  }
  return spec;
}

std::vector<std::size_t> parse_sweep(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    if (item.empty()) continue;
    out.push_back(static_cast<std::size_t>(std::stoull(item)));
  }
  if (out.empty()) throw rsmfg::IoError("empty --sweep list");
  return out;
}

rsmfg::LoadedEquilibrium load_matching_equilibrium(
    const rsmfg::GameSpec& spec, const std::string& policy_path) {
  rsmfg::LoadedEquilibrium eq = rsmfg::load_equilibrium(policy_path, spec);
  if (eq.spec_hash != rsmfg::spec_hash(spec)) {
    std::cerr << "policy file was produced for a different model (hash "
              << eq.spec_hash << " vs " << rsmfg::spec_hash(spec) << ")\n";
    throw ExitCode::kHashMismatch;
  }
  return eq;
}

std::vector<rsmfg::MeanField> flow_marginals(const rsmfg::MeasureFlow& flow,
                                             std::size_t num_states) {
  std::vector<rsmfg::MeanField> out;
  for (std::size_t t = 0; t < flow.num_stages(); ++t) {
    out.push_back(flow.state_marginal(t, num_states));
  }
  return out;
}

int cmd_validate(const std::string& model_path) {
  const rsmfg::GameSpec spec = rsmfg::load_model(model_path);
  const rsmfg::ValidationReport report = rsmfg::validate_spec(spec);
  if (!report.ok()) {
    std::cerr << report.to_string();
    return kInvalidModel;
  }
  return kOk;
}

int cmd_solve(const std::string& model_path, double tol, std::size_t max_iter,
              double damping, const std::string& out_path) {
  const rsmfg::GameSpec spec = load_valid_model(model_path);
  rsmfg::EquilibriumOptions options;
  options.tol = tol;
  options.max_iter = max_iter;
  options.damping = damping;
  const rsmfg::EquilibriumArtifact artifact =
      rsmfg::find_equilibrium(spec, options);
  rsmfg::save_equilibrium(spec, artifact, out_path);
  std::cout << "value " << artifact.value << "\nresidual "
            << artifact.nce_residual << "\ngap " << artifact.optimality_gap
            << "\niterations " << artifact.iterations << "\nconverged "
            << (artifact.converged ? "true" : "false") << "\n";
  if (artifact.cycle_detected) {
    std::cerr << "iteration revisited an earlier flow (period-2 cycle); "
                 "reporting the best iterate\n";
  }
  return artifact.converged ? kOk : kNotConverged;
}

int cmd_simulate(const std::string& model_path, const std::string& policy_path,
                 std::size_t agents, std::size_t episodes, std::uint64_t seed,
                 std::size_t threads, const std::string& out_path) {
  const rsmfg::GameSpec spec = load_valid_model(model_path);
  const rsmfg::LoadedEquilibrium eq =
      load_matching_equilibrium(spec, policy_path);
  const rsmfg::CompiledPolicy policy = rsmfg::compile_loaded_policy(eq, spec);
  const std::vector<rsmfg::MeanField> reference =
      flow_marginals(eq.flow, spec.num_states());

  rsmfg::SimOptions options;
  options.episodes = episodes;
  options.seed = seed;
  options.threads = threads;
  const std::vector<const rsmfg::CompiledPolicy*> policies(agents, &policy);
  const rsmfg::SimReport report =
      rsmfg::simulate(spec, policies, options, &reference);

  double l1 = 0.0;
  for (double v : report.meanfield_l1_mean) l1 += v;
  l1 /= static_cast<double>(report.meanfield_l1_mean.size());

  std::vector<rsmfg::SweepRow> rows;
  rows.push_back({agents, "pi_star", report.agent_costs[0].mean,
                  report.agent_costs[0].std_err, 0.0, 0.0, 0.0, l1});
  rsmfg::write_sweep_csv(rows, out_path);
  return kOk;
}

int cmd_nash_gap(const std::string& model_path, const std::string& policy_path,
                 const std::string& sweep_text, std::size_t episodes,
                 std::uint64_t seed, std::size_t threads,
                 std::size_t num_random, const std::string& out_path) {
  const rsmfg::GameSpec spec = load_valid_model(model_path);
  const rsmfg::LoadedEquilibrium eq =
      load_matching_equilibrium(spec, policy_path);
  const rsmfg::CompiledPolicy pi_star = rsmfg::compile_loaded_policy(eq, spec);
  const std::vector<rsmfg::MeanField> reference =
      flow_marginals(eq.flow, spec.num_states());

  rsmfg::EquilibriumArtifact artifact;  // candidates only need the flow
  artifact.flow = eq.flow;
  const auto candidates =
      rsmfg::default_deviation_candidates(spec, artifact, seed, num_random);
  std::vector<std::pair<std::string, const rsmfg::CompiledPolicy*>> refs;
  for (const auto& [id, policy] : candidates) refs.emplace_back(id, &policy);

  std::vector<rsmfg::SweepRow> rows;
  for (std::size_t agents : parse_sweep(sweep_text)) {
    rsmfg::SimOptions options;
    options.episodes = episodes;
    options.seed = seed;
    options.threads = threads;
    const rsmfg::NashGapReport report =
        rsmfg::nash_gap(spec, pi_star, refs, agents, options, reference);
    rows.push_back({agents, report.baseline.id, report.baseline.mean_cost,
                    report.baseline.std_err, report.gap, report.gap_ci_lo,
                    report.gap_ci_hi, report.baseline.meanfield_l1});
    for (const auto& c : report.candidates) {
      rows.push_back({agents, c.id, c.mean_cost, c.std_err, report.gap,
                      report.gap_ci_lo, report.gap_ci_hi, c.meanfield_l1});
    }
  }
  rsmfg::write_sweep_csv(rows, out_path);
  return kOk;
}

int cmd_horizon(const std::string& model_path, double epsilon) {
  const rsmfg::GameSpec spec = load_valid_model(model_path);
  if (spec.beta >= 1.0) {
    std::cerr << "horizon selection needs beta < 1\n";
    return kUnsupportedBeta;
  }
  const double theta = rsmfg::truncation_bound(spec);
  const std::size_t horizon = rsmfg::choose_horizon(spec, epsilon);
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", theta);
  std::cout << "theta " << buf << "\nT " << horizon << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite risk-sensitive population games: equilibrium solver "
               "and Monte Carlo verification"};
  app.require_subcommand(1);

  std::string model_path, policy_path, out_path;
  double tol = 1e-9, damping = 0.5, epsilon = 0.1;
  std::size_t max_iter = 200, agents = 1, episodes = 1000, threads = 1,
              num_random = 1;
  std::uint64_t seed = 0;
  std::string sweep_text = "16,64,256,1024";

  CLI::App* validate = app.add_subcommand("validate", "Check a model file");
  validate->add_option("model", model_path)->required();

  CLI::App* solve = app.add_subcommand("solve", "Compute an equilibrium");
  solve->add_option("model", model_path)->required();
  solve->add_option("--tol", tol, "Fixed-point residual tolerance");
  solve->add_option("--max-iter", max_iter, "Iteration cap");
  solve->add_option("--damping", damping, "Flow update damping in (0,1]");
  solve->add_option("--out", out_path, "Equilibrium output file")->required();

  CLI::App* simulate = app.add_subcommand(
      "simulate", "Monte Carlo runs of the N-agent game under a policy");
  simulate->add_option("model", model_path)->required();
  simulate->add_option("--policy", policy_path)->required();
  simulate->add_option("--agents", agents)->required();
  simulate->add_option("--episodes", episodes);
  simulate->add_option("--seed", seed);
  simulate->add_option("--threads", threads);
  simulate->add_option("--out", out_path)->required();

  CLI::App* nash = app.add_subcommand(
      "nash-gap", "Unilateral-deviation advantage across population sizes");
  nash->add_option("model", model_path)->required();
  nash->add_option("--policy", policy_path)->required();
  nash->add_option("--sweep", sweep_text, "Comma-separated agent counts");
  nash->add_option("--episodes", episodes);
  nash->add_option("--seed", seed);
  nash->add_option("--threads", threads);
  nash->add_option("--random-candidates", num_random);
  nash->add_option("--out", out_path)->required();

  CLI::App* horizon = app.add_subcommand(
      "horizon", "Horizon and tail constant for a target accuracy");
  horizon->add_option("model", model_path)->required();
  horizon->add_option("--epsilon", epsilon)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) return cmd_validate(model_path);
    if (solve->parsed()) {
      return cmd_solve(model_path, tol, max_iter, damping, out_path);
    }
    if (simulate->parsed()) {
      return cmd_simulate(model_path, policy_path, agents, episodes, seed,
                          threads, out_path);
    }
    if (nash->parsed()) {
      return cmd_nash_gap(model_path, policy_path, sweep_text, episodes, seed,
                          threads, num_random, out_path);
    }
    if (horizon->parsed()) return cmd_horizon(model_path, epsilon);
  } catch (ExitCode code) {
    return code;
  } catch (const rsmfg::IoError& e) {
    std::cerr << e.what() << "\n";
    return kIoError;
  } catch (const rsmfg::CapExceeded& e) {
    std::cerr << e.what() << "\n";
    return kCapExceeded;
  } catch (const std::domain_error& e) {
    std::cerr << e.what() << "\n";
    return kUnsupportedBeta;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIoError;
  }
  return kOk;
}
