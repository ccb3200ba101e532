// Copyright 2026 The dpperm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <CLI11.hpp>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <string>

#include "dpperm/baselines.hpp"
#include "dpperm/dp_perm.hpp"
#include "dpperm/experiment.hpp"
#include "dpperm/io.hpp"
#include "dpperm/kernels.hpp"
#include "dpperm/oracle.hpp"

namespace {

using nlohmann::ordered_json;

struct TestFlags {
  double alpha = 0.05;
  double epsilon = std::numeric_limits<double>::infinity();
  double delta = 0.0;
  long permutations = 500;
  std::uint64_t seed = 0;
  std::string kernel = "gaussian";
  std::string bandwidth = "median";
  std::string statistic;
  std::string mechanism = "refined";
  std::string baseline;
  double p_norm = 2.0;
  double diameter = 0.0;
  bool exact_level = false;
  int threads = 1;
};

int default_threads() {
  if (const char* env = std::getenv("DPPERM_THREADS")) {
    const int value = std::atoi(env);
    if (value > 0) return value;
  }
  return 1;
}

void add_test_flags(CLI::App* cmd, TestFlags* flags, bool two_sample) {
  cmd->add_option("--alpha", flags->alpha, "significance level in (0,1)");
  cmd->add_option("--epsilon", flags->epsilon,
                  "privacy epsilon; inf runs the non-private test");
  cmd->add_option("--delta", flags->delta, "privacy delta in [0,1)");
  cmd->add_option("--permutations", flags->permutations,
                  "number of Monte Carlo permutations B");
  cmd->add_option("--seed", flags->seed, "master seed");
  cmd->add_option("--kernel", flags->kernel, "gaussian | laplacian");
  cmd->add_option("--bandwidth", flags->bandwidth,
                  "median (heuristic) or a positive kernel rate");
  cmd->add_option("--statistic", flags->statistic,
                  two_sample ? "mmd | mmd-u | mean-diff" : "hsic | hsic-u");
  cmd->add_option("--mechanism", flags->mechanism, "refined | naive");
  cmd->add_option("--baseline", flags->baseline,
                  "tot | sarrm (overrides --mechanism)");
  cmd->add_option("--p-norm", flags->p_norm,
                  "mean-diff norm order (>= 1, inf allowed)");
  cmd->add_option("--diameter", flags->diameter,
                  "mean-diff domain diameter (required for mean-diff)");
  cmd->add_flag("--exact-level", flags->exact_level,
                "auxiliary randomization to exact level alpha");
  cmd->add_option("--threads", flags->threads, "worker threads")
      ->default_val(default_threads());
}

dpperm::KernelSpec make_kernel(const TestFlags& flags,
                               const Eigen::MatrixXd& points) {
  const int dim = static_cast<int>(points.cols());
  double sigma;
  if (flags.bandwidth == "median") {
    const double med = dpperm::median_heuristic(points);
    sigma = 1.0 / (2.0 * med * med);
  } else {
    sigma = std::stod(flags.bandwidth);
  }
  if (flags.kernel == "gaussian") {
    return dpperm::KernelSpec::gaussian(sigma, dim);
  }
  if (flags.kernel == "laplacian") {
    return dpperm::KernelSpec::laplacian(sigma, dim);
  }
  throw std::invalid_argument("unknown kernel '" + flags.kernel + "'");
}

ordered_json outcome_json(const dpperm::TestOutcome& outcome,
                          const TestFlags& flags,
                          const std::string& statistic) {
  ordered_json doc;
  if (std::isnan(outcome.p_value)) {
    doc["p_value"] = nullptr;  // SARRM releases a decision, not a p-value
  } else {
    doc["p_value"] = outcome.p_value;
  }
  doc["reject"] = outcome.reject_randomized.value_or(outcome.reject);
  doc["alpha"] = flags.alpha;
  if (std::isfinite(flags.epsilon)) {
    doc["epsilon"] = flags.epsilon;
  } else {
    doc["epsilon"] = nullptr;
  }
  doc["delta"] = flags.delta;
  doc["B"] = outcome.num_permutations;
  doc["statistic"] = statistic;
  doc["noise_scale"] = outcome.noise_scale;
  doc["seed"] = outcome.seed;
  return doc;
}

dpperm::TestConfig make_config(const TestFlags& flags) {
  dpperm::TestConfig config;
  config.alpha = flags.alpha;
  config.num_permutations = flags.permutations;
  config.seed = flags.seed;
  config.exact_level_randomization = flags.exact_level;
  if (std::isfinite(flags.epsilon)) {
    config.budget = dpperm::PrivacyBudget(flags.epsilon, flags.delta);
  }
  if (const auto warning = config.warning()) {
    std::cerr << "warning: " << *warning << "\n";
  }
  return config;
}

int run_two_sample(const std::string& y_path, const std::string& z_path,
                   TestFlags flags) {
  if (flags.statistic.empty()) flags.statistic = "mmd";
  const dpperm::TwoSampleData data(dpperm::read_csv(y_path),
                                   dpperm::read_csv(z_path));
  dpperm::StatisticDescriptor descriptor;
  if (flags.statistic == "mean-diff") {
    descriptor =
        dpperm::StatisticDescriptor::mean_difference(flags.p_norm,
                                                     flags.diameter);
  } else if (flags.statistic == "mmd" || flags.statistic == "mmd-u") {
    descriptor = dpperm::StatisticDescriptor::mmd(
        make_kernel(flags, data.pooled()), flags.statistic == "mmd-u");
  } else {
    throw std::invalid_argument("two-sample: unknown statistic '" +
                                flags.statistic + "'");
  }
  const dpperm::TestConfig config = make_config(flags);
  dpperm::TestOutcome outcome;
  if (flags.baseline == "tot") {
    outcome = dpperm::tot_test(data, descriptor, config, flags.epsilon)
                  .outcome;
  } else if (flags.baseline == "sarrm") {
    outcome = dpperm::sarrm_test(data, descriptor, config, flags.epsilon)
                  .outcome;
  } else if (flags.mechanism == "naive") {
    outcome = dpperm::naive_dp_permutation_test(data, descriptor, config,
                                                flags.threads);
  } else {
    outcome =
        dpperm::dp_permutation_test(data, descriptor, config, flags.threads);
  }
  std::cout << outcome_json(outcome, flags, flags.statistic).dump() << "\n";
  return 0;
}

int run_independence(const std::string& path, int split_col, TestFlags flags) {
  if (flags.statistic.empty()) flags.statistic = "hsic";
  const Eigen::MatrixXd joint = dpperm::read_csv(path);
  if (split_col < 1 || split_col >= joint.cols()) {
    throw dpperm::io_error("--split-col must split the columns in two");
  }
  const dpperm::PairedData data(joint.leftCols(split_col),
                                joint.rightCols(joint.cols() - split_col));
  if (flags.statistic != "hsic" && flags.statistic != "hsic-u") {
    throw std::invalid_argument("independence: unknown statistic '" +
                                flags.statistic + "'");
  }
  const dpperm::StatisticDescriptor descriptor =
      dpperm::StatisticDescriptor::hsic(make_kernel(flags, data.y),
                                        make_kernel(flags, data.z),
                                        flags.statistic == "hsic-u");
  const dpperm::TestConfig config = make_config(flags);
  dpperm::TestOutcome outcome;
  if (flags.baseline == "tot") {
    outcome = dpperm::tot_test(data, descriptor, config, flags.epsilon)
                  .outcome;
  } else if (flags.baseline == "sarrm") {
    outcome = dpperm::sarrm_test(data, descriptor, config, flags.epsilon)
                  .outcome;
  } else if (flags.mechanism == "naive") {
    outcome = dpperm::naive_dp_permutation_test(data, descriptor, config,
                                                flags.threads);
  } else {
    outcome =
        dpperm::dp_permutation_test(data, descriptor, config, flags.threads);
  }
  std::cout << outcome_json(outcome, flags, flags.statistic).dump() << "\n";
  return 0;
}

int run_experiment_cmd(const std::string& spec_path, const std::string& out,
                       const std::string& svg, int threads, bool timings) {
  const dpperm::ExperimentSpec spec =
      dpperm::ExperimentSpec::from_file(spec_path);
  const dpperm::ExperimentResult result =
      dpperm::run_experiment(spec, threads, timings);
  const std::string csv = dpperm::experiment_csv(result, timings);
  if (out.empty() || out == "-") {
    std::cout << csv;
  } else {
    std::ofstream file(out);
    if (!file) throw dpperm::io_error("cannot open '" + out + "'");
    file << csv;
  }
  if (!svg.empty()) dpperm::experiment_svg(spec, result, svg);
  return result.any_failed ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Differentially private permutation tests (kernel two-sample and "
      "independence testing) with baseline private tests and an experiment "
      "harness.\n\nNote: the kernel statistics are quadratic in the sample "
      "size; n = 3000 with B = 2000 permutations is reachable but slow "
      "without --threads."};
  app.require_subcommand(1);

  TestFlags two_flags, ind_flags;
  std::string y_path, z_path, ind_path;
  int split_col = 1;

  auto* two = app.add_subcommand("two-sample",
                                 "private two-sample test on two CSV files");
  two->add_option("y_csv", y_path, "first sample, one row per observation")
      ->required();
  two->add_option("z_csv", z_path, "second sample")->required();
  add_test_flags(two, &two_flags, /*two_sample=*/true);

  auto* ind = app.add_subcommand(
      "independence", "private independence test on one paired CSV file");
  ind->add_option("csv", ind_path, "paired sample, one row per observation")
      ->required();
  ind->add_option("--split-col", split_col,
                  "first split_col columns are Y, the rest Z")
      ->required();
  add_test_flags(ind, &ind_flags, /*two_sample=*/false);

  std::string spec_path, out_path, svg_path;
  int exp_threads = default_threads();
  bool timings = false;
  auto* exp = app.add_subcommand(
      "experiment", "run a level/power study from a JSON spec");
  exp->add_option("spec", spec_path, "experiment spec (JSON)")->required();
  exp->add_option("--out", out_path, "output CSV path (default stdout)");
  exp->add_option("--svg", svg_path, "optional SVG chart path");
  exp->add_option("--threads", exp_threads, "worker threads");
  exp->add_flag("--timings", timings,
                "append a wall-clock column (breaks byte-reproducibility)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  try {
    if (two->parsed()) return run_two_sample(y_path, z_path, two_flags);
    if (ind->parsed()) return run_independence(ind_path, split_col, ind_flags);
    return run_experiment_cmd(spec_path, out_path, svg_path, exp_threads,
                              timings);
  } catch (const dpperm::infeasible_error& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return 3;
  } catch (const dpperm::io_error& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
