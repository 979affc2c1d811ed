#pragma once

#include "mekan/network.hpp"
#include "mekan/types.hpp"

#include <vector>

namespace mekan {

/// Exit weights on the simplex: either fixed (normalized from raw input) or
/// the softmax of learnable logits.
class ExitWeights {
 public:
  enum class Mode { Fixed, Learnable };

  /// Raw weights are normalized to sum to one; they must be nonnegative with
  /// a positive sum.
  static ExitWeights fixed(std::vector<double> raw);
  static ExitWeights uniform(int num_heads);
  static ExitWeights learnable(Vector logits);
  static ExitWeights learnable(int num_heads) { return learnable(Vector::Zero(num_heads)); }

  Mode mode() const noexcept { return mode_; }
  bool is_learnable() const noexcept { return mode_ == Mode::Learnable; }
  int size() const noexcept { return static_cast<int>(mode_ == Mode::Fixed ? fixed_.size() : logits_.size()); }
  /// The normalized weights w.
  Vector weights() const;
  /// Raw weights as supplied (Fixed mode only).
  const std::vector<double>& raw() const noexcept { return raw_; }
  const Vector& logits() const noexcept { return logits_; }
  void set_logits(const Vector& logits);

 private:
  Mode mode_ = Mode::Fixed;
  std::vector<double> raw_;
  Vector fixed_;
  Vector logits_;
};

struct LossSpec {
  ExitWeights exit_weights = ExitWeights::uniform(1);
  double reg_strength = 0.0;
  double entropy_weight = 1.0;
};

/// Mean of squared errors over all n*m entries.
double mse(const Matrix& y_true, const Matrix& y_pred);

double multi_exit_loss(const Vector& per_exit_mse, const ExitWeights& weights);
double multi_exit_loss(const Vector& per_exit_mse, const Vector& weights);

/// Max-subtracted softmax.
Vector softmax_weights(const Vector& logits);

/// d(sum_j w_j L_j)/d(theta_i) with w = softmax(theta).
Vector exit_logit_grad(const Vector& per_exit_mse, const Vector& logits);

/// Per-layer pieces of the activation regularizer, trunk layers first then exits.
struct RegBreakdown {
  double total = 0.0;
  double l1 = 0.0;
  double entropy = 0.0;
  /// Mean |phi| per activation in for_each_activation order.
  std::vector<double> mean_abs;
};

/// L_reg = sum over layers of [ sum_{j,i} mean|phi_{j,i}| + entropy_weight * H ],
/// with H = -sum p log p over the layer's normalized mean |phi| values.
/// Requires a forward pass on the batch of interest.
RegBreakdown reg_loss(const MultiExitKan& model, const ForwardPass& pass, double entropy_weight = 1.0);

/// Entropy of a nonnegative vector after normalization; 0 for an all-zero vector.
double normalized_entropy(const std::vector<double>& values);

}  // namespace mekan
