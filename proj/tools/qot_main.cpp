// Copyright 2026 The qot developers
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Batch-mode driver for the overlapping-tomography pipeline:
//   family | plan | budget | simulate | estimate | run | verify
// Exit codes: 0 success, 1 verification failure / unexpected error,
// 2 invalid arguments, 3 missing data, 4 resource limit.

#include <CLI11.hpp>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "qot/backend.hpp"
#include "qot/budget.hpp"
#include "qot/estimate.hpp"
#include "qot/hash_family.hpp"
#include "qot/io.hpp"
#include "qot/parallel.hpp"
#include "qot/schedule.hpp"

namespace {

using namespace qot;

struct FamilyArgs {
  int n = 0;
  int k = 2;
  std::string construction = "binary";
  double delta = 0.05;
  std::uint64_t seed = 0;
  int side = 0;  // checkerboard
  std::string out;
  bool verify = false;
};

struct PlanArgs {
  std::string family_file;
  std::uint64_t shots = 0;
  double epsilon = 0;
  double delta = 0.05;
  std::string out;
};

struct BudgetArgs {
  int n = 0;
  int k = 2;
  double epsilon = 0.05;
  double delta = 0.05;
  std::uint64_t shots = 0;
  double cycle_seconds = 0.25;
  std::string json_out;
};

struct SimulateArgs {
  std::string plan_file;
  std::string state = "random";
  std::uint64_t seed = 0;
  std::uint64_t state_seed = 1;
  double flip_prob = 0.0;
  int workers = 0;
  std::string out;
};

struct EstimateArgs {
  std::string plan_file;
  std::string counts_file;
  std::string family_file;  // optional; consistency check only
  int k = 2;
  bool pooling = false;
  bool project = false;
  int workers = 0;
  std::string subset;  // "r,s,..." 1-based; empty = all subsets
  std::string out;
};

struct RunArgs {
  int n = 0;
  int k = 2;
  std::string state = "random";
  std::uint64_t seed = 0;
  std::uint64_t state_seed = 1;
  std::uint64_t shots = 0;
  double epsilon = 0.1;
  double delta = 0.05;
  double flip_prob = 0.0;
  bool pooling = false;
  bool project = false;
  int workers = 0;
  std::string outdir = ".";
};

struct VerifyArgs {
  std::string family_file;
  bool oracle = false;
  int oracle_n = 6;
  std::uint64_t oracle_seed = 1;
};

int resolved_workers(int requested) {
  return requested > 0 ? requested : default_workers();
}

std::uint64_t resolve_shots(std::uint64_t shots, double epsilon, double delta,
                            int n, int k) {
  if (shots > 0) return shots;
  if (epsilon > 0) return shots_required(epsilon, delta, n, k);
  throw invalid_argument("provide --shots or --epsilon/--delta");
}

// Fixture spec: random | ghz | zeros | dimer-bell | dimer-mixed.
// Dense fixtures respect the 20-qubit guard; dimer fixtures scale.
CountsTable simulate_fixture(const std::string& state_name, std::uint64_t state_seed,
                             const MeasurementPlan& plan, std::uint64_t seed,
                             const SampleOptions& options) {
  if (state_name == "random")
    return sample(random_state(plan.n, state_seed), plan, seed, options);
  if (state_name == "ghz")
    return sample(ghz_state(plan.n), plan, seed, options);
  if (state_name == "zeros")
    return sample(zero_state(plan.n), plan, seed, options);
  if (state_name == "dimer-bell")
    return sample(dimer_chain(plan.n, bell_pair_state()), plan, seed, options);
  if (state_name == "dimer-mixed")
    return sample(dimer_chain(plan.n, maximally_mixed_pair()), plan, seed, options);
  throw invalid_argument("unknown state fixture: " + state_name +
                         " (expected random|ghz|zeros|dimer-bell|dimer-mixed)");
}

PerfectHashFamily build_family(const FamilyArgs& args) {
  if (args.construction == "binary") {
    if (args.n < 2) throw invalid_argument("--n is required for binary families");
    return binary_family(args.n);
  }
  if (args.construction == "random") {
    if (args.n < 2) throw invalid_argument("--n is required for random families");
    return random_family(args.n, args.k, args.delta, args.seed);
  }
  if (args.construction == "checkerboard") {
    if (args.side < 2)
      throw invalid_argument("--side is required for checkerboard colorings");
    return checkerboard_family(args.side);
  }
  throw invalid_argument("unknown construction: " + args.construction);
}

int cmd_family(const FamilyArgs& args) {
  const PerfectHashFamily family = build_family(args);
  if (args.verify) {
    const VerifyResult verdict = verify_perfect(family);
    if (!verdict.perfect) {
      std::cerr << "family: not perfect; first uncovered subset (1-based):";
      for (int q : verdict.violating_subset) std::cerr << " " << q + 1;
      std::cerr << "\n";
      return 1;
    }
    std::cout << "verified perfect (" << family.n << "," << family.k
              << ") family of size " << family.size() << "\n";
  }
  save_family(family, args.out);
  std::cout << "wrote " << args.out << " (" << family.size() << " functions, n="
            << family.n << ", k=" << family.k << ")\n";
  return 0;
}

int cmd_plan(const PlanArgs& args) {
  const PerfectHashFamily family = load_family(args.family_file);
  const std::uint64_t shots =
      resolve_shots(args.shots, args.epsilon, args.delta, family.n, family.k);
  const MeasurementPlan plan = plan_general(family, shots);
  save_plan(plan, args.out);
  std::cout << "wrote " << args.out << " (" << plan.size() << " settings, M="
            << plan.shots << ", " << plan.total_rounds() << " rounds)\n";
  return 0;
}

int cmd_budget(const BudgetArgs& args) {
  const std::optional<std::uint64_t> override_shots =
      args.shots > 0 ? std::optional<std::uint64_t>(args.shots) : std::nullopt;
  const ShotBudget qot_budget = campaign(args.n, args.k, args.epsilon, args.delta,
                                         args.cycle_seconds, Strategy::qot,
                                         override_shots);
  std::cout << "shot budget for n=" << args.n << ", k=" << args.k
            << ", epsilon=" << args.epsilon << "\n";
  std::cout << "  pairs to characterize : " << binomial(args.n, 2) << "\n";
  std::cout << "  shots per setting M   : " << qot_budget.shots << "\n";
  std::cout << "  global failure bound  : " << qot_budget.delta << " ("
            << 100.0 * (1.0 - qot_budget.delta) << "% success)\n";
  std::cout << "  overlapping strategy  : " << qot_budget.settings
            << " settings, " << qot_budget.rounds_qot << " rounds, "
            << qot_budget.wallclock_days() << " days at "
            << args.cycle_seconds << " s/round\n";
  if (args.n % 2 == 0) {
    const ShotBudget naive_budget =
        campaign(args.n, args.k, args.epsilon, args.delta, args.cycle_seconds,
                 Strategy::naive, override_shots);
    std::cout << "  naive strategy        : " << naive_budget.rounds_naive
              << " rounds, " << naive_budget.wallclock_days() << " days ("
              << naive_budget.wallclock_weeks() << " weeks)\n";
    std::cout << "  round-count ratio     : "
              << static_cast<double>(naive_budget.rounds_naive) /
                     static_cast<double>(qot_budget.rounds_qot)
              << "x\n";
  }
  if (!args.json_out.empty()) {
    detail::open_output(args.json_out) << budget_to_json(qot_budget).dump(2) << "\n";
    std::cout << "wrote " << args.json_out << "\n";
  }
  return 0;
}

int cmd_simulate(const SimulateArgs& args) {
  const MeasurementPlan plan = load_plan(args.plan_file);
  SampleOptions options;
  options.bit_flip_prob = args.flip_prob;
  options.workers = resolved_workers(args.workers);
  const CountsTable counts =
      simulate_fixture(args.state, args.state_seed, plan, args.seed, options);
  save_counts(counts, args.out);
  std::cout << "wrote " << args.out << " (" << plan.size() << " settings x "
            << plan.shots << " shots)\n";
  return 0;
}

std::vector<int> parse_subset(const std::string& text, int n) {
  std::vector<int> subset;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t comma = text.find(',', pos);
    const std::string token = text.substr(pos, comma - pos);
    try {
      subset.push_back(std::stoi(token) - 1);
    } catch (const std::exception&) {
      throw invalid_argument("bad subset entry: " + token);
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  for (int q : subset)
    if (q < 0 || q >= n) throw invalid_argument("subset qubit out of range 1..n");
  return subset;
}

int cmd_estimate(const EstimateArgs& args) {
  const MeasurementPlan plan = load_plan(args.plan_file);
  if (!args.family_file.empty()) {
    const PerfectHashFamily family = load_family(args.family_file);
    if (family.n != plan.n)
      throw invalid_argument("family and plan disagree on qubit count");
  }
  const CountsTable counts = load_counts(args.counts_file, plan.n);
  validate_counts(counts, plan);

  EstimateOptions options;
  options.pooling = args.pooling;
  options.psd_projection = args.project;
  options.entanglement = (args.k == 2) || !args.subset.empty();
  options.workers = resolved_workers(args.workers);

  std::vector<ReducedDensityMatrix> rdms;
  if (!args.subset.empty()) {
    const std::vector<int> subset = parse_subset(args.subset, plan.n);
    options.entanglement = subset.size() == 2;
    rdms.push_back(reconstruct_rdm(subset, counts, plan, options));
  } else {
    rdms = reconstruct_all(counts, plan, args.k, options);
  }
  save_rdms(rdms, args.out);
  std::cout << "wrote " << args.out << " (" << rdms.size() << " records)\n";
  return 0;
}

int cmd_run(const RunArgs& args) {
  namespace fs = std::filesystem;
  fs::create_directories(args.outdir);
  const std::string family_path = (fs::path(args.outdir) / "family.json").string();
  const std::string plan_path = (fs::path(args.outdir) / "plan.json").string();
  const std::string counts_path = (fs::path(args.outdir) / "counts.jsonl").string();
  const std::string rdms_path = (fs::path(args.outdir) / "rdms.jsonl").string();

  FamilyArgs family_args;
  family_args.n = args.n;
  family_args.k = args.k;
  family_args.construction = args.k == 2 ? "binary" : "random";
  family_args.out = family_path;
  const PerfectHashFamily family = build_family(family_args);
  save_family(family, family_path);

  const std::uint64_t shots =
      resolve_shots(args.shots, args.epsilon, args.delta, args.n, args.k);
  const MeasurementPlan plan = plan_general(family, shots);
  save_plan(plan, plan_path);

  SampleOptions sample_options;
  sample_options.bit_flip_prob = args.flip_prob;
  sample_options.workers = resolved_workers(args.workers);
  const CountsTable counts =
      simulate_fixture(args.state, args.state_seed, plan, args.seed, sample_options);
  save_counts(counts, counts_path);

  EstimateOptions estimate_options;
  estimate_options.pooling = args.pooling;
  estimate_options.psd_projection = args.project;
  estimate_options.entanglement = args.k == 2;
  estimate_options.workers = resolved_workers(args.workers);
  const std::vector<ReducedDensityMatrix> rdms =
      reconstruct_all(counts, plan, args.k, estimate_options);
  save_rdms(rdms, rdms_path);

  std::cout << "run complete: " << rdms.size() << " subset RDMs\n"
            << "  " << family_path << "\n  " << plan_path << "\n  "
            << counts_path << "\n  " << rdms_path << "\n";
  return 0;
}

int cmd_verify(const VerifyArgs& args) {
  int status = 0;
  if (!args.family_file.empty()) {
    const PerfectHashFamily family = load_family(args.family_file);
    const VerifyResult verdict = verify_perfect(family);
    if (verdict.perfect) {
      std::cout << "family: perfect (" << family.n << "," << family.k
                << "), size " << family.size() << "\n";
    } else {
      std::cout << "family: NOT perfect; first uncovered subset (1-based):";
      for (int q : verdict.violating_subset) std::cout << " " << q + 1;
      std::cout << "\n";
      status = 1;
    }
  }
  if (args.oracle) {
    // Exact-mode oracle sweep: reconstruct every pair RDM of a random
    // state from exact expectation values and compare against the
    // partial-trace oracle.
    const PureState state = random_state(args.oracle_n, args.oracle_seed);
    double worst = 0;
    for (int a = 0; a < args.oracle_n; ++a)
      for (int b = a + 1; b < args.oracle_n; ++b) {
        const std::vector<int> subset = {a, b};
        const ReducedDensityMatrix rdm = reconstruct_rdm_exact(state, subset);
        const Eigen::MatrixXcd oracle = exact_rdm(state, subset);
        worst = std::max(worst, (rdm.matrix - oracle).cwiseAbs().maxCoeff());
      }
    std::cout << "oracle sweep (n=" << args.oracle_n
              << "): max |reconstructed - partial trace| = " << worst << "\n";
    if (worst > 1e-10) {
      std::cout << "oracle sweep: FAILED (tolerance 1e-10)\n";
      status = 1;
    } else {
      std::cout << "oracle sweep: ok\n";
    }
  }
  if (args.family_file.empty() && !args.oracle)
    throw invalid_argument("nothing to verify: pass --family and/or --oracle");
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qot: measure every k-qubit reduced density matrix of an "
               "n-qubit system with O(log n) parallel measurement settings"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Optional config file; command-line flags win");

  FamilyArgs family_args;
  auto* family_cmd =
      app.add_subcommand("family", "Construct a hash family and write it to disk");
  family_cmd->add_option("--n", family_args.n, "Qubit count");
  family_cmd->add_option("--k", family_args.k, "Subset size (random families)");
  family_cmd->add_option("--construction", family_args.construction,
                         "binary | random | checkerboard");
  family_cmd->add_option("--delta", family_args.delta,
                         "Random construction failure probability");
  family_cmd->add_option("--seed", family_args.seed, "Random construction seed");
  family_cmd->add_option("--side", family_args.side,
                         "Lattice side length (checkerboard)");
  family_cmd->add_flag("--verify", family_args.verify,
                       "Exhaustively verify perfection before writing");
  family_cmd->add_option("--out", family_args.out, "Output family file")
      ->required();

  PlanArgs plan_args;
  auto* plan_cmd =
      app.add_subcommand("plan", "Compile a family into a measurement plan");
  plan_cmd->add_option("--family", plan_args.family_file, "Family file")
      ->required();
  plan_cmd->add_option("--shots", plan_args.shots, "Shots per setting M");
  plan_cmd->add_option("--epsilon", plan_args.epsilon,
                       "Coefficient accuracy target (alternative to --shots)");
  plan_cmd->add_option("--delta", plan_args.delta,
                       "Global failure probability for --epsilon");
  plan_cmd->add_option("--out", plan_args.out, "Output plan file")->required();

  BudgetArgs budget_args;
  auto* budget_cmd =
      app.add_subcommand("budget", "Shot/round/wall-clock calculator");
  budget_cmd->add_option("--n", budget_args.n, "Qubit count")->required();
  budget_cmd->add_option("--k", budget_args.k, "Subset size (2)");
  budget_cmd->add_option("--epsilon", budget_args.epsilon, "Accuracy target");
  budget_cmd->add_option("--delta", budget_args.delta,
                         "Global failure probability target");
  budget_cmd->add_option("--shots", budget_args.shots,
                         "Override shots per setting");
  budget_cmd->add_option("--cycle-seconds", budget_args.cycle_seconds,
                         "Seconds per measurement round");
  budget_cmd->add_option("--json", budget_args.json_out,
                         "Also write the budget record as JSON");

  SimulateArgs simulate_args;
  auto* simulate_cmd =
      app.add_subcommand("simulate", "Sample a model state against a plan");
  simulate_cmd->add_option("--plan", simulate_args.plan_file, "Plan file")
      ->required();
  simulate_cmd->add_option("--state", simulate_args.state,
                           "random | ghz | zeros | dimer-bell | dimer-mixed");
  simulate_cmd
      ->add_option("--seed", simulate_args.seed,
                   "Sampling seed (mandatory: runs must be reproducible)")
      ->required();
  simulate_cmd->add_option("--state-seed", simulate_args.state_seed,
                           "Random-state fixture seed");
  simulate_cmd->add_option("--flip-prob", simulate_args.flip_prob,
                           "Per-qubit readout bit-flip probability");
  simulate_cmd->add_option("--workers", simulate_args.workers,
                           "Worker threads (default: hardware)");
  simulate_cmd->add_option("--out", simulate_args.out, "Output counts file")
      ->required();

  EstimateArgs estimate_args;
  auto* estimate_cmd = app.add_subcommand(
      "estimate", "Reconstruct subset RDMs from a plan and counts");
  estimate_cmd->add_option("--plan", estimate_args.plan_file, "Plan file")
      ->required();
  estimate_cmd->add_option("--counts", estimate_args.counts_file, "Counts file")
      ->required();
  estimate_cmd->add_option("--family", estimate_args.family_file,
                           "Family file (consistency check)");
  estimate_cmd->add_option("--k", estimate_args.k, "Subset size");
  estimate_cmd->add_flag("--pooling", estimate_args.pooling,
                         "Average over all covering settings");
  estimate_cmd->add_flag("--project", estimate_args.project,
                         "PSD-project the estimates");
  estimate_cmd->add_option("--workers", estimate_args.workers,
                           "Worker threads (default: hardware)");
  estimate_cmd->add_option("--subset", estimate_args.subset,
                           "Reconstruct one subset only, e.g. 1,5 (1-based)");
  estimate_cmd->add_option("--out", estimate_args.out, "Output RDM file")
      ->required();

  RunArgs run_args;
  auto* run_cmd = app.add_subcommand(
      "run", "family -> plan -> simulate -> estimate in one step");
  run_cmd->add_option("--n", run_args.n, "Qubit count")->required();
  run_cmd->add_option("--k", run_args.k, "Subset size");
  run_cmd->add_option("--state", run_args.state,
                      "random | ghz | zeros | dimer-bell | dimer-mixed");
  run_cmd->add_option("--seed", run_args.seed, "Sampling seed")->required();
  run_cmd->add_option("--state-seed", run_args.state_seed,
                      "Random-state fixture seed");
  run_cmd->add_option("--shots", run_args.shots, "Shots per setting M");
  run_cmd->add_option("--epsilon", run_args.epsilon,
                      "Accuracy target (used when --shots is absent)");
  run_cmd->add_option("--delta", run_args.delta, "Failure probability target");
  run_cmd->add_option("--flip-prob", run_args.flip_prob,
                      "Per-qubit readout bit-flip probability");
  run_cmd->add_flag("--pooling", run_args.pooling,
                    "Average over all covering settings");
  run_cmd->add_flag("--project", run_args.project, "PSD-project the estimates");
  run_cmd->add_option("--workers", run_args.workers, "Worker threads");
  run_cmd->add_option("--outdir", run_args.outdir, "Output directory");

  VerifyArgs verify_args;
  auto* verify_cmd = app.add_subcommand(
      "verify", "Verify family perfection and/or run the exact-mode oracle sweep");
  verify_cmd->add_option("--family", verify_args.family_file, "Family file");
  verify_cmd->add_flag("--oracle", verify_args.oracle,
                       "Run the exact-mode oracle sweep");
  verify_cmd->add_option("--oracle-n", verify_args.oracle_n,
                         "Qubits in the oracle sweep state");
  verify_cmd->add_option("--oracle-seed", verify_args.oracle_seed,
                         "Oracle sweep state seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const auto dispatch = [&](const std::string& stage,
                            const std::function<int()>& body) {
    try {
      return body();
    } catch (const invalid_argument& e) {
      std::cerr << stage << ": " << e.what() << "\n";
      return invalid_argument::exit_code;
    } catch (const missing_data& e) {
      std::cerr << stage << ": " << e.what() << "\n";
      return missing_data::exit_code;
    } catch (const resource_limit& e) {
      std::cerr << stage << ": " << e.what() << "\n";
      return resource_limit::exit_code;
    } catch (const std::exception& e) {
      std::cerr << stage << ": unexpected error: " << e.what() << "\n";
      return 1;
    }
  };

  if (family_cmd->parsed()) return dispatch("family", [&] { return cmd_family(family_args); });
  if (plan_cmd->parsed()) return dispatch("plan", [&] { return cmd_plan(plan_args); });
  if (budget_cmd->parsed()) return dispatch("budget", [&] { return cmd_budget(budget_args); });
  if (simulate_cmd->parsed()) return dispatch("simulate", [&] { return cmd_simulate(simulate_args); });
  if (estimate_cmd->parsed()) return dispatch("estimate", [&] { return cmd_estimate(estimate_args); });
  if (run_cmd->parsed()) return dispatch("run", [&] { return cmd_run(run_args); });
  if (verify_cmd->parsed()) return dispatch("verify", [&] { return cmd_verify(verify_args); });
  return 2;
}
