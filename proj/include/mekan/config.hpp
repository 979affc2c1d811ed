#pragma once

#include "mekan/network.hpp"
#include "mekan/tasks.hpp"
#include "mekan/trainer.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace mekan {

enum class TaskKind { Sinc, Sines2D, Feynman, Ikeda, Ecosystem, FivePeaks, Csv };
std::string_view to_string(TaskKind kind);

struct TaskConfig {
  TaskKind kind = TaskKind::Sinc;
  int n_train = 1000;
  int n_test = 1000;
  // feynman
  std::string feynman_id = "I.6.20";
  /// Input hypercube override for regression tasks.
  std::vector<std::pair<double, double>> ranges;
  // ikeda / ecosystem
  int transient = 1000;
  double mu = 0.9;
  double dt = 0.01;
  double dt_sample = 0.1;
  // five_peaks
  int n_per_peak = 100;
  PeakCenters centers = kDefaultPeakCenters;
  int n_eval = 500;
  // csv
  std::string csv_path;
  std::string target;
  std::vector<std::string> features;
};

struct ModelConfig {
  KanShape shape{{1, 2, 2, 2, 1}};
  bool multi_exit = true;
  BaseKind base_kind = BaseKind::SiLU;
  int spline_order = 3;
  double grid_lo = -1.0;
  double grid_hi = 1.0;
  double init_sigma = 0.1;
};

/// Everything needed to reproduce one run. The initial grid size is the
/// first entry of the grid schedule.
struct RunConfig {
  TaskConfig task;
  ModelConfig model;
  /// Raw (unnormalized) exit weights; empty means uniform.
  std::vector<double> exit_weights;
  bool learn_to_exit = false;
  double reg_strength = 0.0;
  double entropy_weight = 1.0;
  std::vector<int> grid_schedule{3, 5, 10, 20};
  int steps_per_stage = 30;
  int iters_per_step = 1;
  bool update_grid = true;
  LbfgsConfig lbfgs;
  std::uint64_t seed = 0;
  std::string output_dir = "run";
};

/// Unknown keys and type mismatches raise ConfigError naming the key path.
RunConfig parse_run_config(const nlohmann::json& doc);
RunConfig load_run_config(const std::filesystem::path& path);

/// The effective config, defaults included.
nlohmann::json to_json(const RunConfig& config);

BuildOptions make_build_options(const RunConfig& config);
/// Resolves exit weights against the head count of the model being trained.
TrainConfig make_train_config(const RunConfig& config, int num_heads);

/// Train/test data for every task except five_peaks.
DatasetPair make_task_data(const TaskConfig& task, std::uint64_t seed);

struct RunOutcome {
  FitResult fit;
  EvalReport test;
  double seconds = 0.0;
};

/// build -> fit -> evaluate on the test split.
RunOutcome run_training(const RunConfig& config);

struct ContinualOutcome {
  ContinualResult result;
  double seconds = 0.0;
};

/// Five-peak phases trained in order at the first scheduled grid size.
ContinualOutcome run_continual(const RunConfig& config);

}  // namespace mekan
