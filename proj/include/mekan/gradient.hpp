#pragma once

#include "mekan/losses.hpp"
#include "mekan/network.hpp"

namespace mekan {

struct GradientResult {
  double loss = 0.0;
  /// Aligned with flatten_params; extended by K logit entries when the exit
  /// weights are learnable.
  Vector grad;
  Vector per_exit_mse;
  double data_loss = 0.0;
  double reg_loss = 0.0;
};

/// Joint loss sum_k w_k MSE_k + lambda * L_reg and its exact gradient, one
/// reverse pass per sample. Rows are processed in fixed-size chunks on the
/// OpenMP pool and chunk gradients are summed in chunk order, so the result
/// does not depend on the thread count.
GradientResult loss_and_grad(const MultiExitKan& model, const Matrix& x, const Matrix& y, const LossSpec& spec);

/// Single-threaded row-by-row reference for the same quantity.
GradientResult loss_and_grad_serial(const MultiExitKan& model, const Matrix& x, const Matrix& y, const LossSpec& spec);

/// Loss only, assembled from forward(), mse() and reg_loss().
double joint_loss(const MultiExitKan& model, const Matrix& x, const Matrix& y, const LossSpec& spec);

inline constexpr Eigen::Index kGradientChunkRows = 64;

}  // namespace mekan
