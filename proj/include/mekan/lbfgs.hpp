#pragma once

#include "mekan/types.hpp"

#include <deque>
#include <functional>
#include <iosfwd>
#include <string_view>
#include <vector>

namespace mekan {

struct LbfgsConfig {
  int history_size = 10;
  int max_iters = 30;
  /// Initial trial step scale.
  double learning_rate = 1.0;
  double tol_grad = 1e-32;
  double tol_param = 1e-32;
  double tol_curvature = 1e-32;
  double wolfe_c1 = 1e-4;
  double wolfe_c2 = 0.9;
  /// Objective evaluations allowed per line search.
  int max_line_search_evals = 25;

  void validate() const;
};

struct IterationRecord {
  int iter = 0;
  double loss = 0.0;
  double grad_norm = 0.0;
  double step_size = 0.0;
  int func_evals = 0;
};

enum class StopReason { MaxIterations, GradientTolerance, ParameterTolerance, LossTolerance, LineSearchFailure };
std::string_view to_string(StopReason reason);

struct OptTrace {
  std::vector<IterationRecord> records;
  StopReason stop_reason = StopReason::MaxIterations;
  bool line_search_failed = false;
  int curvature_updates = 0;
  int total_evals = 0;
};

/// Writes iter,loss,grad_norm,step_size rows with a header.
void write_trace_csv(std::ostream& os, const OptTrace& trace);

/// Returns f(x) and writes the gradient into `grad` (already sized like x).
using Objective = std::function<double(const Vector& x, Vector& grad)>;
/// Called after every accepted iterate.
using IterationCallback = std::function<void(const Vector& x, const IterationRecord& record)>;

struct MinimizeResult {
  Vector x;
  double loss = 0.0;
  OptTrace trace;
};

/// Limited-memory BFGS (two-loop recursion, gamma = s'y / y'y scaling) with
/// a strong-Wolfe line search. Returns the best point seen.
MinimizeResult minimize(const Objective& objective, Vector x0, const LbfgsConfig& config,
                        const IterationCallback& on_iteration = {});

/// Curvature pairs, oldest first.
struct LbfgsHistory {
  std::deque<Vector> s;
  std::deque<Vector> y;
};

/// Search direction -H g from the two-loop recursion.
Vector lbfgs_direction(const LbfgsHistory& history, const Vector& grad);

struct LineSample {
  double value = 0.0;
  double slope = 0.0;
};
/// phi(alpha) and phi'(alpha) along the search direction.
using LineFunction = std::function<LineSample(double alpha)>;

struct LineSearchResult {
  bool ok = false;
  double step = 0.0;
  LineSample at_step;
  int evals = 0;
  /// Lowest value seen and where (may differ from `step` when !ok).
  double best_step = 0.0;
  double best_value = 0.0;
};

/// Bracketing phase followed by zoom with safeguarded cubic interpolation.
/// Throws std::invalid_argument if phi'(0) >= 0.
LineSearchResult line_search_strong_wolfe(const LineFunction& phi, LineSample at_zero, double initial_step, double c1,
                                          double c2, int max_evals = 25);

}  // namespace mekan
