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

#ifndef DPPERM_EXPERIMENT_HPP_
#define DPPERM_EXPERIMENT_HPP_

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "dpperm/baselines.hpp"
#include "dpperm/dp_perm.hpp"
#include "dpperm/io.hpp"
#include "dpperm/svg.hpp"
#include "dpperm/synthetic.hpp"

namespace dpperm {

enum class Scenario {
  kTwoSamplePerturbedUniform,
  kIndependencePerturbedUniform,
  kTwoPoint,
  kUserData,
};

inline const char* scenario_name(Scenario s) {
  switch (s) {
    case Scenario::kTwoSamplePerturbedUniform:
      return "two_sample_perturbed_uniform";
    case Scenario::kIndependencePerturbedUniform:
      return "independence_perturbed_uniform";
    case Scenario::kTwoPoint:
      return "two_point";
    case Scenario::kUserData:
      return "user_data";
  }
  return "unknown";
}

inline bool scenario_is_two_sample(Scenario s) {
  return s != Scenario::kIndependencePerturbedUniform;
}

// Which mechanism a named test runs with; the statistic family follows the
// scenario (MMD for two-sample, HSIC for independence).
struct TestPlan {
  std::string name;
  bool u_statistic = false;
  Mechanism mechanism = Mechanism::kRefined;
};

inline TestPlan resolve_test_name(const std::string& name, Scenario scenario) {
  const bool two_sample = scenario_is_two_sample(scenario);
  const std::string stat = two_sample ? "mmd" : "hsic";
  if (name == "dp" + stat) return {name, false, Mechanism::kRefined};
  if (name == "dp" + stat + "-u") return {name, true, Mechanism::kRefined};
  if (name == "naive-dp" + stat) return {name, false, Mechanism::kNaive};
  if (name == stat) return {name, false, Mechanism::kNonprivate};
  if (name == "tot-" + stat) return {name, false, Mechanism::kTot};
  if (name == "sarrm-" + stat) return {name, false, Mechanism::kSarrm};
  throw std::invalid_argument("experiment: unknown test '" + name +
                              "' for scenario " + scenario_name(scenario));
}

struct ExperimentSpec {
  Scenario scenario = Scenario::kTwoSamplePerturbedUniform;
  std::vector<std::string> tests;
  double alpha = 0.05;
  long permutations = 500;
  long repetitions = 100;
  std::uint64_t seed = 0;
  std::optional<double> bandwidth;  // fixed Gaussian rate; default: median

  std::vector<double> epsilons{1.0};
  std::vector<double> deltas{0.0};
  std::vector<long> sample_sizes{500};
  std::vector<long> dimensions{1};
  std::vector<double> amplitudes{0.0};
  std::vector<double> nus{0.1};

  // user_data scenario inputs
  std::string y_csv;
  std::string z_csv;
  std::string paired_csv;
  int split_col = -1;

  void validate() const {
    if (tests.empty()) throw std::invalid_argument("experiment: empty tests");
    if (repetitions < 1) throw std::invalid_argument("experiment: R >= 1");
    if (!(alpha > 0.0 && alpha < 1.0) || permutations < 1) {
      throw std::invalid_argument("experiment: invalid alpha or permutations");
    }
    if (epsilons.empty() || deltas.empty() || sample_sizes.empty() ||
        dimensions.empty() || amplitudes.empty() || nus.empty()) {
      throw std::invalid_argument("experiment: empty grid axis");
    }
    for (const auto& t : tests) resolve_test_name(t, scenario);
  }

  static ExperimentSpec from_json(const nlohmann::json& doc);
  static ExperimentSpec from_file(const std::string& path) {
    std::ifstream file(path);
    if (!file) throw io_error("cannot open '" + path + "'");
    nlohmann::json doc;
    try {
      file >> doc;
    } catch (const nlohmann::json::exception& e) {
      throw io_error(path + ": " + e.what());
    }
    return from_json(doc);
  }
};

inline ExperimentSpec ExperimentSpec::from_json(const nlohmann::json& doc) {
  static const std::set<std::string> known{
      "scenario", "tests",      "alpha",      "permutations", "repetitions",
      "seed",     "bandwidth",  "grid",       "y_csv",        "z_csv",
      "paired_csv", "split_col"};
  static const std::set<std::string> known_axes{"epsilon", "delta",     "n",
                                                "d",       "amplitude", "nu"};
  for (const auto& [key, value] : doc.items()) {
    if (!known.count(key)) {
      throw std::invalid_argument("experiment spec: unknown key '" + key +
                                  "'");
    }
  }
  ExperimentSpec spec;
  const std::string scenario = doc.at("scenario").get<std::string>();
  if (scenario == "two_sample_perturbed_uniform") {
    spec.scenario = Scenario::kTwoSamplePerturbedUniform;
  } else if (scenario == "independence_perturbed_uniform") {
    spec.scenario = Scenario::kIndependencePerturbedUniform;
  } else if (scenario == "two_point") {
    spec.scenario = Scenario::kTwoPoint;
  } else if (scenario == "user_data") {
    spec.scenario = Scenario::kUserData;
  } else {
    throw std::invalid_argument("experiment spec: unknown scenario '" +
                                scenario + "'");
  }
  spec.tests = doc.at("tests").get<std::vector<std::string>>();
  if (doc.contains("alpha")) spec.alpha = doc["alpha"].get<double>();
  if (doc.contains("permutations")) {
    spec.permutations = doc["permutations"].get<long>();
  }
  if (doc.contains("repetitions")) {
    spec.repetitions = doc["repetitions"].get<long>();
  }
  if (doc.contains("seed")) spec.seed = doc["seed"].get<std::uint64_t>();
  if (doc.contains("bandwidth") && !doc["bandwidth"].is_string()) {
    spec.bandwidth = doc["bandwidth"].get<double>();
  } else if (doc.contains("bandwidth") &&
             doc["bandwidth"].get<std::string>() != "median") {
    throw std::invalid_argument("experiment spec: bandwidth must be a number"
                                " or \"median\"");
  }
  if (doc.contains("grid")) {
    for (const auto& [key, value] : doc["grid"].items()) {
      if (!known_axes.count(key)) {
        throw std::invalid_argument("experiment spec: unknown grid axis '" +
                                    key + "'");
      }
      if (key == "epsilon") spec.epsilons = value.get<std::vector<double>>();
      if (key == "delta") spec.deltas = value.get<std::vector<double>>();
      if (key == "n") spec.sample_sizes = value.get<std::vector<long>>();
      if (key == "d") spec.dimensions = value.get<std::vector<long>>();
      if (key == "amplitude") {
        spec.amplitudes = value.get<std::vector<double>>();
      }
      if (key == "nu") spec.nus = value.get<std::vector<double>>();
    }
  }
  if (doc.contains("y_csv")) spec.y_csv = doc["y_csv"].get<std::string>();
  if (doc.contains("z_csv")) spec.z_csv = doc["z_csv"].get<std::string>();
  if (doc.contains("paired_csv")) {
    spec.paired_csv = doc["paired_csv"].get<std::string>();
  }
  if (doc.contains("split_col")) spec.split_col = doc["split_col"].get<int>();
  spec.validate();
  return spec;
}

struct GridPoint {
  double epsilon;
  double delta;
  long n;
  long d;
  double amplitude;
  double nu;
  std::size_t index;
};

struct ResultRow {
  std::string scenario;
  std::string test;
  GridPoint point{};
  long rejections = 0;
  long repetitions = 0;
  double power = 0.0;
  double wilson_low = 0.0;
  double wilson_high = 0.0;
  double seconds = 0.0;
  bool failed = false;
  std::string error;
};

// Wilson 95% score interval for a binomial proportion.
inline std::pair<double, double> wilson_interval(long successes, long trials,
                                                 double z = 1.959963984540054) {
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half =
      z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  // at the boundary counts, center -+ half equals the endpoint analytically;
  // pin it so rounding cannot exclude the point estimate
  const double low = successes == 0 ? 0.0 : std::max(0.0, center - half);
  const double high =
      successes == trials ? 1.0 : std::min(1.0, center + half);
  return {low, high};
}

struct ExperimentResult {
  std::vector<ResultRow> rows;
  bool any_failed = false;
};

namespace detail {

struct RepData {
  std::optional<TwoSampleData> two_sample;
  std::optional<PairedData> paired;
};

inline RepData generate_data(const ExperimentSpec& spec, const GridPoint& g,
                             std::uint64_t rep_seed) {
  RepData data;
  switch (spec.scenario) {
    case Scenario::kTwoSamplePerturbedUniform: {
      RandomStream sy(rep_seed, StreamPurpose::kData, 0, 0);
      RandomStream sz(rep_seed, StreamPurpose::kData, 1, 0);
      const PerturbedUniformSpec uniform(static_cast<int>(g.d), 0.0);
      const PerturbedUniformSpec perturbed(static_cast<int>(g.d), g.amplitude);
      data.two_sample.emplace(sample_perturbed_uniform(g.n, uniform, sy),
                              sample_perturbed_uniform(g.n, perturbed, sz));
      break;
    }
    case Scenario::kIndependencePerturbedUniform: {
      RandomStream stream(rep_seed, StreamPurpose::kData, 0, 0);
      data.paired.emplace(sample_joint_perturbed_uniform(
          g.n, static_cast<int>(g.d), static_cast<int>(g.d), g.amplitude,
          stream));
      break;
    }
    case Scenario::kTwoPoint: {
      if (!(g.nu > 0.0 && g.nu < 0.5)) {
        throw std::invalid_argument("two_point scenario: nu must be in (0,"
                                    " 0.5)");
      }
      Eigen::VectorXd x = Eigen::VectorXd::Zero(g.d);
      Eigen::VectorXd v = Eigen::VectorXd::Zero(g.d);
      v[0] = 1.0;
      const TwoPointSpec spec2(x, v, 0.5, 0.5 + g.nu);
      RandomStream sy(rep_seed, StreamPurpose::kData, 0, 0);
      RandomStream sz(rep_seed, StreamPurpose::kData, 1, 0);
      data.two_sample.emplace(sample_two_point_p0(g.n, spec2, sy),
                              sample_two_point_q0(g.n, spec2, sz));
      break;
    }
    case Scenario::kUserData:
      break;  // supplied externally
  }
  return data;
}

struct PreparedKit {
  StatisticDescriptor v_descriptor;
  StatisticDescriptor u_descriptor;
  std::unique_ptr<PreparedStatistic> v_statistic;
  std::unique_ptr<PreparedStatistic> u_statistic;
};

template <typename Data>
PreparedKit make_kit(const ExperimentSpec& spec, const Data& data,
                     bool need_v, bool need_u) {
  PreparedKit kit;
  // Two-atom data defeats the median heuristic (more than half of the
  // pairwise distances are zero), so that scenario defaults to a unit rate.
  const std::optional<double> bandwidth =
      spec.bandwidth.has_value()
          ? spec.bandwidth
          : (spec.scenario == Scenario::kTwoPoint ? std::optional<double>(1.0)
                                                  : std::nullopt);
  if constexpr (std::is_same_v<Data, TwoSampleData>) {
    const KernelSpec kernel =
        bandwidth.has_value()
            ? KernelSpec::gaussian(*bandwidth,
                                   static_cast<int>(data.y.cols()))
            : median_gaussian_kernel(data.pooled());
    kit.v_descriptor = StatisticDescriptor::mmd(kernel, false);
    kit.u_descriptor = StatisticDescriptor::mmd(kernel, true);
  } else {
    const KernelSpec kernel_y =
        bandwidth.has_value()
            ? KernelSpec::gaussian(*bandwidth,
                                   static_cast<int>(data.y.cols()))
            : median_gaussian_kernel(data.y);
    const KernelSpec kernel_z =
        bandwidth.has_value()
            ? KernelSpec::gaussian(*bandwidth,
                                   static_cast<int>(data.z.cols()))
            : median_gaussian_kernel(data.z);
    kit.v_descriptor = StatisticDescriptor::hsic(kernel_y, kernel_z, false);
    kit.u_descriptor = StatisticDescriptor::hsic(kernel_y, kernel_z, true);
  }
  if (need_v) kit.v_statistic = prepare_statistic(kit.v_descriptor, data);
  if (need_u) kit.u_statistic = prepare_statistic(kit.u_descriptor, data);
  return kit;
}

template <typename Data>
bool run_one_test(const ExperimentSpec& spec, const GridPoint& g,
                  const TestPlan& plan, const Data& data,
                  const PreparedKit& kit, std::uint64_t test_seed,
                  const SarrmParams* sarrm) {
  TestConfig config;
  config.alpha = spec.alpha;
  config.num_permutations = spec.permutations;
  config.seed = test_seed;
  switch (plan.mechanism) {
    case Mechanism::kRefined:
    case Mechanism::kNaive: {
      config.budget = PrivacyBudget(g.epsilon, g.delta);
      EngineOptions options;
      options.mechanism = plan.mechanism;
      const auto& prepared =
          plan.u_statistic ? *kit.u_statistic : *kit.v_statistic;
      return run_permutation_test(prepared, config, options).reject;
    }
    case Mechanism::kNonprivate: {
      EngineOptions options;
      const auto& prepared =
          plan.u_statistic ? *kit.u_statistic : *kit.v_statistic;
      return run_permutation_test(prepared, config, options).reject;
    }
    case Mechanism::kTot:
      return tot_test(data, kit.v_descriptor, config, g.epsilon)
          .outcome.reject;
    case Mechanism::kSarrm:
      return sarrm_test(data, kit.v_descriptor, config, g.epsilon, sarrm)
          .outcome.reject;
  }
  return false;
}

}  // namespace detail

// Runs every (grid point x test) cell for R repetitions. Numeric output is a
// pure function of the spec (repetitions are scheduled onto workers by an
// atomic counter, but every repetition derives its streams from
// (seed, grid index, repetition index) alone, so thread count cannot change
// any cell). A failing cell (e.g. SARRM infeasibility) is reported in its row
// and does not disturb the others.
inline ExperimentResult run_experiment(const ExperimentSpec& spec,
                                       int threads = 1,
                                       bool include_timings = false) {
  spec.validate();
  std::vector<GridPoint> grid;
  for (const double eps : spec.epsilons) {
    for (const double delta : spec.deltas) {
      for (const long n : spec.sample_sizes) {
        for (const long d : spec.dimensions) {
          for (const double a : spec.amplitudes) {
            for (const double nu : spec.nus) {
              grid.push_back({eps, delta, n, d, a, nu, grid.size()});
            }
          }
        }
      }
    }
  }
  std::vector<TestPlan> plans;
  plans.reserve(spec.tests.size());
  for (const auto& name : spec.tests) {
    plans.push_back(resolve_test_name(name, spec.scenario));
  }
  const bool need_v = [&] {
    for (const auto& p : plans) {
      if (!p.u_statistic) return true;
    }
    return false;
  }();
  const bool need_u = [&] {
    for (const auto& p : plans) {
      if (p.u_statistic) return true;
    }
    return false;
  }();

  detail::RepData user_data;
  if (spec.scenario == Scenario::kUserData) {
    if (!spec.paired_csv.empty()) {
      const Eigen::MatrixXd joint = read_csv(spec.paired_csv);
      if (spec.split_col < 1 || spec.split_col >= joint.cols()) {
        throw std::invalid_argument("experiment: split_col out of range");
      }
      user_data.paired.emplace(joint.leftCols(spec.split_col),
                               joint.rightCols(joint.cols() - spec.split_col));
    } else {
      user_data.two_sample.emplace(read_csv(spec.y_csv), read_csv(spec.z_csv));
    }
  }

  // SARRM parameters depend only on (alpha, epsilon, k_max); search once per
  // grid point that needs them.
  struct CellState {
    std::optional<SarrmParams> sarrm;
    bool sarrm_failed = false;
    std::string sarrm_error;
  };
  std::vector<CellState> cells(grid.size());
  const bool wants_sarrm = [&] {
    for (const auto& p : plans) {
      if (p.mechanism == Mechanism::kSarrm) return true;
    }
    return false;
  }();
  if (wants_sarrm) {
    for (const auto& g : grid) {
      const long min_rows =
          spec.scenario == Scenario::kUserData
              ? (user_data.two_sample
                     ? std::min(user_data.two_sample->n(),
                                user_data.two_sample->m())
                     : user_data.paired->n())
              : g.n;
      const long per_block = scenario_is_two_sample(spec.scenario) ? 1 : 2;
      const long k_max = (min_rows / per_block - 1) / 2;
      try {
        if (k_max < 1) throw infeasible_error("sarrm: sample too small");
        cells[g.index].sarrm = sarrm_params(spec.alpha, g.epsilon, 0.0025,
                                            k_max);
      } catch (const infeasible_error& e) {
        cells[g.index].sarrm_failed = true;
        cells[g.index].sarrm_error = e.what();
      }
    }
  }

  const std::size_t num_tests = plans.size();
  const long reps = spec.repetitions;
  std::vector<std::uint8_t> rejects(grid.size() * num_tests * reps, 0);
  std::vector<std::string> cell_errors(grid.size() * num_tests);
  std::vector<std::atomic<bool>> cell_failed(grid.size() * num_tests);
  for (auto& flag : cell_failed) flag.store(false);
  std::mutex error_mutex;

  const auto mark_failed = [&](std::size_t cell, const char* message) {
    if (!cell_failed[cell].exchange(true)) {
      std::lock_guard<std::mutex> lock(error_mutex);
      cell_errors[cell] = message;
    }
  };

  const auto run_rep = [&](std::size_t g_index, long rep) {
    const GridPoint& g = grid[g_index];
    const std::uint64_t rep_seed = derive_seed(
        derive_seed(spec.seed, g_index), static_cast<std::uint64_t>(rep));
    const auto run_all = [&](const auto& dataset) {
      const auto kit = detail::make_kit(spec, dataset, need_v, need_u);
      for (std::size_t t = 0; t < num_tests; ++t) {
        const std::size_t cell = g_index * num_tests + t;
        if (plans[t].mechanism == Mechanism::kSarrm &&
            cells[g_index].sarrm_failed) {
          mark_failed(cell, cells[g_index].sarrm_error.c_str());
          continue;
        }
        const std::uint64_t test_seed =
            derive_seed(rep_seed, 1000 + static_cast<std::uint64_t>(t));
        try {
          const bool reject = detail::run_one_test(
              spec, g, plans[t], dataset, kit, test_seed,
              cells[g_index].sarrm ? &*cells[g_index].sarrm : nullptr);
          rejects[cell * reps + rep] = reject ? 1 : 0;
        } catch (const std::exception& e) {
          mark_failed(cell, e.what());
        }
      }
    };
    try {
      detail::RepData local;
      const detail::RepData* data = &user_data;
      if (spec.scenario != Scenario::kUserData) {
        local = detail::generate_data(spec, g, rep_seed);
        data = &local;
      }
      if (data->two_sample) {
        run_all(*data->two_sample);
      } else {
        run_all(*data->paired);
      }
    } catch (const std::exception& e) {
      // data generation or kernel calibration failed: the whole grid point
      // is unusable for every test
      for (std::size_t t = 0; t < num_tests; ++t) {
        mark_failed(g_index * num_tests + t, e.what());
      }
    }
  };

  const auto started = std::chrono::steady_clock::now();
  const std::size_t total_tasks = grid.size() * static_cast<std::size_t>(reps);
  std::atomic<std::size_t> next_task{0};
  const int workers = std::max(1, threads);
  std::vector<double> cell_seconds(grid.size(), 0.0);
  const auto worker = [&] {
    for (;;) {
      const std::size_t task = next_task.fetch_add(1);
      if (task >= total_tasks) break;
      run_rep(task / reps, static_cast<long>(task % reps));
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
          .count();

  ExperimentResult result;
  for (const auto& g : grid) {
    for (std::size_t t = 0; t < num_tests; ++t) {
      const std::size_t cell = g.index * num_tests + t;
      ResultRow row;
      row.scenario = scenario_name(spec.scenario);
      row.test = plans[t].name;
      row.point = g;
      row.repetitions = reps;
      if (cell_failed[cell].load()) {
        row.failed = true;
        row.error = cell_errors[cell];
        result.any_failed = true;
      } else {
        long count = 0;
        for (long r = 0; r < reps; ++r) count += rejects[cell * reps + r];
        row.rejections = count;
        row.power = static_cast<double>(count) / static_cast<double>(reps);
        const auto [lo, hi] = wilson_interval(count, reps);
        row.wilson_low = lo;
        row.wilson_high = hi;
      }
      if (include_timings) {
        row.seconds = elapsed / static_cast<double>(grid.size() * num_tests);
      }
      result.rows.push_back(std::move(row));
    }
  }
  return result;
}

// Fixed column order; the optional wall-clock column is excluded by default
// so that re-runs of the same spec and seed are byte-identical.
inline std::string experiment_csv(const ExperimentResult& result,
                                  bool include_timings = false) {
  std::string out =
      "scenario,test,epsilon,delta,n,d,amplitude,nu,rejections,repetitions,"
      "power,wilson_low,wilson_high,status";
  if (include_timings) out += ",seconds";
  out += '\n';
  for (const auto& row : result.rows) {
    out += row.scenario + ',' + row.test + ',';
    out += format_double(row.point.epsilon) + ',';
    out += format_double(row.point.delta) + ',';
    out += std::to_string(row.point.n) + ',';
    out += std::to_string(row.point.d) + ',';
    out += format_double(row.point.amplitude) + ',';
    out += format_double(row.point.nu) + ',';
    if (row.failed) {
      std::string message = row.error;
      for (auto& c : message) {
        if (c == ',' || c == '\n') c = ';';
      }
      out += ",,,,,failed: " + message;
    } else {
      out += std::to_string(row.rejections) + ',';
      out += std::to_string(row.repetitions) + ',';
      out += format_double(row.power) + ',';
      out += format_double(row.wilson_low) + ',';
      out += format_double(row.wilson_high) + ",ok";
    }
    if (include_timings) out += ',' + format_double(row.seconds);
    out += '\n';
  }
  return out;
}

// Power-vs-axis chart: the swept axis is the first grid axis with more than
// one value; remaining axes are pinned to their first grid value.
inline void experiment_svg(const ExperimentSpec& spec,
                           const ExperimentResult& result,
                           const std::string& path) {
  enum Axis { kEpsilon, kDelta, kN, kD, kAmplitude, kNu };
  Axis axis = kEpsilon;
  std::size_t ticks = spec.epsilons.size();
  std::string title = "epsilon";
  if (ticks <= 1 && spec.sample_sizes.size() > 1) {
    axis = kN, ticks = spec.sample_sizes.size(), title = "n";
  }
  if (ticks <= 1 && spec.dimensions.size() > 1) {
    axis = kD, ticks = spec.dimensions.size(), title = "d";
  }
  if (ticks <= 1 && spec.amplitudes.size() > 1) {
    axis = kAmplitude, ticks = spec.amplitudes.size(), title = "amplitude";
  }
  if (ticks <= 1 && spec.nus.size() > 1) {
    axis = kNu, ticks = spec.nus.size(), title = "nu";
  }
  if (ticks <= 1 && spec.deltas.size() > 1) {
    axis = kDelta, ticks = spec.deltas.size(), title = "delta";
  }
  const auto axis_value = [&](const GridPoint& g) {
    switch (axis) {
      case kEpsilon: return g.epsilon;
      case kDelta: return g.delta;
      case kN: return static_cast<double>(g.n);
      case kD: return static_cast<double>(g.d);
      case kAmplitude: return g.amplitude;
      case kNu: return g.nu;
    }
    return 0.0;
  };
  const auto tick_value = [&](std::size_t i) {
    switch (axis) {
      case kEpsilon: return spec.epsilons[i];
      case kDelta: return spec.deltas[i];
      case kN: return static_cast<double>(spec.sample_sizes[i]);
      case kD: return static_cast<double>(spec.dimensions[i]);
      case kAmplitude: return spec.amplitudes[i];
      case kNu: return spec.nus[i];
    }
    return 0.0;
  };
  const auto pinned = [&](const GridPoint& g) {
    return (axis == kEpsilon || g.epsilon == spec.epsilons.front()) &&
           (axis == kDelta || g.delta == spec.deltas.front()) &&
           (axis == kN || g.n == spec.sample_sizes.front()) &&
           (axis == kD || g.d == spec.dimensions.front()) &&
           (axis == kAmplitude || g.amplitude == spec.amplitudes.front()) &&
           (axis == kNu || g.nu == spec.nus.front());
  };

  std::vector<std::string> labels(ticks);
  for (std::size_t i = 0; i < ticks; ++i) labels[i] = format_double(tick_value(i));
  std::vector<SvgSeries> series;
  for (const auto& name : spec.tests) {
    SvgSeries s;
    s.name = name;
    s.values.assign(ticks, std::numeric_limits<double>::quiet_NaN());
    for (const auto& row : result.rows) {
      if (row.test != name || row.failed || !pinned(row.point)) continue;
      for (std::size_t i = 0; i < ticks; ++i) {
        if (axis_value(row.point) == tick_value(i)) s.values[i] = row.power;
      }
    }
    series.push_back(std::move(s));
  }
  write_svg_chart(path, labels, series, title, "power");
}

}  // namespace dpperm

#endif  // DPPERM_EXPERIMENT_HPP_
