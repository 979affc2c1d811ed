#include "mekan/losses.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace mekan {

ExitWeights ExitWeights::fixed(std::vector<double> raw) {
  if (raw.empty()) throw ConfigError("exit_weights", "needs at least one weight");
  double sum = 0.0;
  for (double v : raw) {
    if (!std::isfinite(v) || v < 0.0) throw ConfigError("exit_weights", "weights must be finite and nonnegative");
    sum += v;
  }
  if (!(sum > 0.0)) throw ConfigError("exit_weights", "weights must have a positive sum");
  ExitWeights w;
  w.mode_ = Mode::Fixed;
  w.fixed_.resize(static_cast<Eigen::Index>(raw.size()));
  for (std::size_t k = 0; k < raw.size(); ++k) w.fixed_(static_cast<Eigen::Index>(k)) = raw[k] / sum;
  w.raw_ = std::move(raw);
  return w;
}

ExitWeights ExitWeights::uniform(int num_heads) { return fixed(std::vector<double>(static_cast<std::size_t>(num_heads), 1.0)); }

ExitWeights ExitWeights::learnable(Vector logits) {
  if (logits.size() < 1) throw ConfigError("exit_weights", "needs at least one logit");
  if (!logits.allFinite()) throw ConfigError("exit_weights", "logits must be finite");
  ExitWeights w;
  w.mode_ = Mode::Learnable;
  w.logits_ = std::move(logits);
  return w;
}

Vector ExitWeights::weights() const { return mode_ == Mode::Fixed ? fixed_ : softmax_weights(logits_); }

void ExitWeights::set_logits(const Vector& logits) {
  if (mode_ != Mode::Learnable) throw ConfigError("exit_weights", "fixed weights have no logits");
  if (logits.size() != logits_.size()) throw ShapeError("logit vector length mismatch");
  logits_ = logits;
}

double mse(const Matrix& y_true, const Matrix& y_pred) {
  if (y_true.rows() != y_pred.rows() || y_true.cols() != y_pred.cols())
    throw DataError("mse: shape mismatch");
  if (y_true.size() == 0) throw DataError("mse: empty input");
  return (y_true - y_pred).squaredNorm() / static_cast<double>(y_true.size());
}

double multi_exit_loss(const Vector& per_exit_mse, const Vector& weights) {
  if (per_exit_mse.size() != weights.size()) throw ShapeError("multi_exit_loss: weight count does not match exits");
  double total = 0.0;
  for (Eigen::Index k = 0; k < weights.size(); ++k)
    if (weights(k) != 0.0) total += weights(k) * per_exit_mse(k);
  return total;
}

double multi_exit_loss(const Vector& per_exit_mse, const ExitWeights& weights) {
  return multi_exit_loss(per_exit_mse, weights.weights());
}

Vector softmax_weights(const Vector& logits) {
  const double top = logits.maxCoeff();
  Vector w = (logits.array() - top).exp().matrix();
  return w / w.sum();
}

Vector exit_logit_grad(const Vector& per_exit_mse, const Vector& logits) {
  if (per_exit_mse.size() != logits.size()) throw ShapeError("exit_logit_grad: length mismatch");
  const Vector w = softmax_weights(logits);
  // sum_j L_j (delta_ij w_i - w_i w_j) = w_i (L_i - sum_j w_j L_j)
  const double mean = w.dot(per_exit_mse);
  return (w.array() * (per_exit_mse.array() - mean)).matrix();
}

double normalized_entropy(const std::vector<double>& values) {
  const double sum = std::accumulate(values.begin(), values.end(), 0.0);
  if (!(sum > 0.0)) return 0.0;
  double h = 0.0;
  for (double v : values) {
    if (v <= 0.0) continue;
    const double p = v / sum;
    h -= p * std::log(p);
  }
  return h;
}

RegBreakdown reg_loss(const MultiExitKan& model, const ForwardPass& pass, double entropy_weight) {
  if (pass.trunk_signals.size() != model.trunk.size() + 1 || pass.trunk_signals.front().rows() == 0)
    throw DataError("reg_loss: no cached forward pass for this model");
  RegBreakdown out;
  const auto n = pass.trunk_signals.front().rows();
  auto layer_term = [&](const KanLayer& layer, const Matrix& input) {
    std::vector<double> means(layer.acts.size(), 0.0);
    for (int j = 0; j < layer.out_width; ++j)
      for (int i = 0; i < layer.in_width; ++i) {
        double acc = 0.0;
        for (Eigen::Index r = 0; r < n; ++r) acc += std::abs(eval_activation(layer.at(j, i), input(r, i)));
        means[static_cast<std::size_t>(j * layer.in_width + i)] = acc / static_cast<double>(n);
      }
    const double l1 = std::accumulate(means.begin(), means.end(), 0.0);
    const double h = normalized_entropy(means);
    out.l1 += l1;
    out.entropy += h;
    out.total += l1 + entropy_weight * h;
    out.mean_abs.insert(out.mean_abs.end(), means.begin(), means.end());
  };
  for (std::size_t l = 0; l < model.trunk.size(); ++l) layer_term(model.trunk[l], pass.trunk_signals[l]);
  for (std::size_t k = 0; k < model.exits.size(); ++k) layer_term(model.exits[k], pass.trunk_signals[k]);
  return out;
}

}  // namespace mekan
