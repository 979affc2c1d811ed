#pragma once

#include "mekan/lbfgs.hpp"
#include "mekan/losses.hpp"
#include "mekan/network.hpp"
#include "mekan/tasks.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace mekan {

struct TrainConfig {
  std::vector<int> grid_schedule{3, 5, 10, 20};
  /// Optimizer steps per grid size. Each step runs up to `iters_per_step`
  /// L-BFGS iterations; curvature history carries over between steps.
  /// Set `iters_per_step` to 20 for PyKAN's `LBFGS.step` budget.
  int steps_per_stage = 30;
  int iters_per_step = 1;
  LossSpec loss;
  std::uint64_t seed = 0;
  /// Train softmax exit logits jointly with the network.
  bool learn_to_exit = false;
  /// Refit grids to the current inputs before each stage.
  bool update_grid = true;
  LbfgsConfig lbfgs;

  void validate() const;
};

struct StageReport {
  int grid_size = 0;
  /// Training loss before and immediately after the grid transfer.
  double loss_before_refit = 0.0;
  double loss_after_refit = 0.0;
  /// Largest per-activation refit residual RMS during the transfer.
  double max_refit_residual = 0.0;
  bool rank_deficient_refit = false;
  OptTrace trace;
  double final_loss = 0.0;
  /// Softmax exit weights after every iteration (learn_to_exit only).
  std::vector<Vector> exit_weight_history;
};

struct FitResult {
  MultiExitKan model;
  std::vector<StageReport> stages;
  /// Final weights; carries learned logits when learn_to_exit is set.
  ExitWeights exit_weights = ExitWeights::uniform(1);
};

/// Grid-refinement training: for each grid size, transfer all activations to
/// that size, widen grid ranges to the current inputs, then run L-BFGS.
FitResult fit(MultiExitKan model, const Dataset& train, const TrainConfig& config);

struct EvalReport {
  std::vector<double> rmse;
  /// NaN when the targets have zero variance.
  std::vector<double> r2;
  bool r2_defined = true;
  int best_exit = 0;
  int n_test = 0;
};

EvalReport evaluate(const MultiExitKan& model, const Dataset& test);

struct ContinualResult {
  MultiExitKan model;
  std::vector<EvalReport> per_phase;
  std::vector<StageReport> phases;
  ExitWeights exit_weights = ExitWeights::uniform(1);
};

/// Sequential training on each phase with a fixed grid; `config.steps_per_stage`
/// steps per phase. Evaluates on `full_domain` after each phase.
ContinualResult fit_continual(MultiExitKan model, const std::vector<Dataset>& phases, const Dataset& full_domain,
                              const TrainConfig& config);

struct Rollout {
  /// Row k is the state after k + 1 closed-loop steps.
  Matrix trajectory;
  /// Rollout stopped early at a non-finite state.
  bool truncated = false;
};

/// x_{n+1} = head_k(x_n). `exit_index` < 0 selects the final head.
Rollout rollout(const MultiExitKan& model, const Vector& x0, int n_steps, int exit_index = -1);

/// 1-based index of the first row whose max-abs error exceeds `threshold`;
/// the row count when no row does.
int divergence_time(const Matrix& pred, const Matrix& truth, double threshold);

inline constexpr double kDefaultDivergenceThreshold = 0.2;

}  // namespace mekan
