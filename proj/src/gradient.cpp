#include "mekan/gradient.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace mekan {

namespace {

// Offsets of each activation's coefficients inside the flat parameter vector.
struct ParamLayout {
  std::vector<std::vector<std::size_t>> trunk;
  std::vector<std::vector<std::size_t>> exits;
  std::size_t total = 0;
};

ParamLayout layout_of(const MultiExitKan& model) {
  ParamLayout layout;
  auto assign = [&](const KanLayer& layer) {
    std::vector<std::size_t> offsets(layer.acts.size());
    for (std::size_t a = 0; a < layer.acts.size(); ++a) {
      offsets[a] = layout.total;
      layout.total += layer.acts[a].coeffs.size();
    }
    return offsets;
  };
  for (const auto& layer : model.trunk) layout.trunk.push_back(assign(layer));
  for (const auto& layer : model.exits) layout.exits.push_back(assign(layer));
  return layout;
}

// Per-activation coefficient multiplying sign(phi) in the output adjoint of
// that activation: lambda * dL_reg/dM_{j,i} / n, where M is the batch mean |phi|.
struct RegAdjoint {
  std::vector<std::vector<double>> trunk;
  std::vector<std::vector<double>> exits;
  bool active = false;
};

std::vector<double> layer_reg_adjoint(const KanLayer& layer, const Matrix& input, double lambda, double entropy_weight,
                                      double& l1_out, double& entropy_out) {
  const auto n = input.rows();
  const auto count = static_cast<Eigen::Index>(layer.acts.size());
  std::vector<double> means(layer.acts.size(), 0.0);
#pragma omp parallel for schedule(static)
  for (Eigen::Index a = 0; a < count; ++a) {
    const int j = static_cast<int>(a) / layer.in_width;
    const int i = static_cast<int>(a) % layer.in_width;
    double acc = 0.0;
    for (Eigen::Index r = 0; r < n; ++r) acc += std::abs(eval_activation(layer.at(j, i), input(r, i)));
    means[static_cast<std::size_t>(a)] = acc / static_cast<double>(n);
  }
  double sum = 0.0;
  for (double m : means) sum += m;
  const double h = normalized_entropy(means);
  l1_out += sum;
  entropy_out += h;

  // dH/dM_r = -(log p_r + H) / S; subgradient zero where M_r = 0.
  std::vector<double> coef(means.size(), 0.0);
  for (std::size_t a = 0; a < means.size(); ++a) {
    double d = 1.0;
    if (sum > 0.0 && means[a] > 0.0) d += entropy_weight * (-(std::log(means[a] / sum) + h) / sum);
    coef[a] = lambda * d / static_cast<double>(n);
  }
  return coef;
}

struct Scratch {
  std::vector<std::vector<double>> adjoints;
  std::vector<double> head_adjoint;
};

// Accumulate coefficient gradients of one layer for one sample and, when
// `adj_in` is non-null, add the adjoint of the layer input.
void backprop_layer(const KanLayer& layer, const double* in, const double* adj_out, const std::vector<std::size_t>& offsets,
                    const std::vector<double>* reg_coef, double* grad, double* adj_in) {
  LocalBasis local;
  const bool want_slope = adj_in != nullptr;
  for (int j = 0; j < layer.out_width; ++j) {
    for (int i = 0; i < layer.in_width; ++i) {
      const std::size_t a = static_cast<std::size_t>(j * layer.in_width + i);
      const SplineActivation& act = layer.acts[a];
      double adj = adj_out[j];
      if (reg_coef != nullptr) {
        const double phi = eval_activation(act, in[i]);
        if (phi > 0.0)
          adj += (*reg_coef)[a];
        else if (phi < 0.0)
          adj -= (*reg_coef)[a];
      }
      if (adj == 0.0) continue;
      eval_local_basis(act.grid, in[i], local, want_slope);
      double* g = grad + offsets[a] + local.first;
      for (int r = 0; r < local.count; ++r) g[r] += adj * local.value[r];
      if (want_slope) {
        double slope = base_slope(act.base_kind, in[i]);
        for (int r = 0; r < local.count; ++r) slope += act.coeffs[static_cast<std::size_t>(local.first + r)] * local.slope[r];
        adj_in[i] += adj * slope;
      }
    }
  }
}

struct Prepared {
  ForwardPass pass;
  Vector per_exit_mse;
  Vector weights;
  double data_loss = 0.0;
  double reg_loss = 0.0;
  RegAdjoint reg;
  ParamLayout layout;
  double residual_scale = 0.0;
};

Prepared prepare(const MultiExitKan& model, const Matrix& x, const Matrix& y, const LossSpec& spec) {
  if (x.rows() == 0) throw DataError("loss_and_grad: empty batch");
  if (y.rows() != x.rows() || y.cols() != model.shape.output_dim())
    throw DataError("loss_and_grad: target shape does not match the batch/model");
  check_finite(y, "target");
  const int heads = model.num_heads();
  if (spec.exit_weights.size() != heads)
    throw ShapeError("loss spec has " + std::to_string(spec.exit_weights.size()) + " exit weights, model has " +
                     std::to_string(heads) + " heads");
  if (spec.reg_strength < 0.0) throw ConfigError("reg_strength", "must be nonnegative");

  Prepared p;
  p.pass = forward_pass(model, x);
  p.weights = spec.exit_weights.weights();
  p.per_exit_mse.resize(heads);
  for (int k = 0; k < heads; ++k) {
    const double v = mse(y, p.pass.heads[static_cast<std::size_t>(k)]);
    p.per_exit_mse(k) = v;
    if (!std::isfinite(v) && (p.weights(k) != 0.0 || spec.exit_weights.is_learnable()))
      throw NonFiniteLossError(k, "non-finite loss at exit " + std::to_string(k));
  }
  p.data_loss = multi_exit_loss(p.per_exit_mse, p.weights);
  p.layout = layout_of(model);
  p.residual_scale = 2.0 / static_cast<double>(y.size());

  if (spec.reg_strength > 0.0) {
    double l1 = 0.0;
    double ent = 0.0;
    p.reg.active = true;
    for (std::size_t l = 0; l < model.trunk.size(); ++l)
      p.reg.trunk.push_back(
          layer_reg_adjoint(model.trunk[l], p.pass.trunk_signals[l], spec.reg_strength, spec.entropy_weight, l1, ent));
    for (std::size_t k = 0; k < model.exits.size(); ++k)
      p.reg.exits.push_back(
          layer_reg_adjoint(model.exits[k], p.pass.trunk_signals[k], spec.reg_strength, spec.entropy_weight, l1, ent));
    p.reg_loss = l1 + spec.entropy_weight * ent;
    if (!std::isfinite(p.reg_loss)) throw NonFiniteLossError(-1, "non-finite regularization loss");
  }
  return p;
}

void backprop_row(const MultiExitKan& model, const Matrix& y, const Prepared& p, Eigen::Index r, Scratch& scratch,
                  double* grad) {
  const int depth = model.shape.depth();
  const int m = model.shape.output_dim();
  auto& adj = scratch.adjoints;
  if (adj.size() != static_cast<std::size_t>(depth + 1)) {
    adj.resize(static_cast<std::size_t>(depth + 1));
    for (int l = 0; l <= depth; ++l) adj[l].assign(static_cast<std::size_t>(model.shape.widths[l]), 0.0);
    scratch.head_adjoint.assign(static_cast<std::size_t>(m), 0.0);
  }
  for (auto& v : adj) std::fill(v.begin(), v.end(), 0.0);

  const int last = model.num_heads() - 1;
  const double w_last = p.weights(last) * p.residual_scale;
  for (int c = 0; c < m; ++c) adj[depth][c] = w_last * (p.pass.heads[last](r, c) - y(r, c));

  for (int l = depth - 1; l >= 0; --l) {
    const double* in = p.pass.trunk_signals[l].row(r).data();
    double* adj_in = l > 0 ? adj[l].data() : nullptr;
    backprop_layer(model.trunk[l], in, adj[l + 1].data(), p.layout.trunk[l], p.reg.active ? &p.reg.trunk[l] : nullptr,
                   grad, adj_in);
    if (l < static_cast<int>(model.exits.size())) {
      const double wk = p.weights(l) * p.residual_scale;
      if (wk == 0.0 && !p.reg.active) continue;
      for (int c = 0; c < m; ++c) scratch.head_adjoint[c] = wk * (p.pass.heads[l](r, c) - y(r, c));
      backprop_layer(model.exits[l], in, scratch.head_adjoint.data(), p.layout.exits[l],
                     p.reg.active ? &p.reg.exits[l] : nullptr, grad, adj_in);
    }
  }
}

GradientResult finish(const Prepared& p, const LossSpec& spec, Vector grad) {
  GradientResult out;
  out.per_exit_mse = p.per_exit_mse;
  out.data_loss = p.data_loss;
  out.reg_loss = p.reg_loss;
  out.loss = p.data_loss + spec.reg_strength * p.reg_loss;
  if (spec.exit_weights.is_learnable()) {
    const auto np = grad.size();
    grad.conservativeResize(np + p.per_exit_mse.size());
    grad.tail(p.per_exit_mse.size()) = exit_logit_grad(p.per_exit_mse, spec.exit_weights.logits());
  }
  if (!std::isfinite(out.loss)) throw NonFiniteLossError(-1, "non-finite joint loss");
  out.grad = std::move(grad);
  return out;
}

}  // namespace

GradientResult loss_and_grad(const MultiExitKan& model, const Matrix& x, const Matrix& y, const LossSpec& spec) {
  const Prepared p = prepare(model, x, y, spec);
  const Eigen::Index n = x.rows();
  const Eigen::Index chunks = (n + kGradientChunkRows - 1) / kGradientChunkRows;
  const auto np = static_cast<Eigen::Index>(p.layout.total);
  Matrix partial = Matrix::Zero(chunks, np);

#pragma omp parallel
  {
    Scratch scratch;
#pragma omp for schedule(dynamic, 1)
    for (Eigen::Index c = 0; c < chunks; ++c) {
      double* g = partial.row(c).data();
      const Eigen::Index end = std::min(n, (c + 1) * kGradientChunkRows);
      for (Eigen::Index r = c * kGradientChunkRows; r < end; ++r) backprop_row(model, y, p, r, scratch, g);
    }
  }

  Vector grad = Vector::Zero(np);
  for (Eigen::Index c = 0; c < chunks; ++c) grad += partial.row(c).transpose();
  return finish(p, spec, std::move(grad));
}

GradientResult loss_and_grad_serial(const MultiExitKan& model, const Matrix& x, const Matrix& y, const LossSpec& spec) {
  const Prepared p = prepare(model, x, y, spec);
  Vector grad = Vector::Zero(static_cast<Eigen::Index>(p.layout.total));
  Scratch scratch;
  for (Eigen::Index r = 0; r < x.rows(); ++r) backprop_row(model, y, p, r, scratch, grad.data());
  return finish(p, spec, std::move(grad));
}

double joint_loss(const MultiExitKan& model, const Matrix& x, const Matrix& y, const LossSpec& spec) {
  const ForwardPass pass = forward_pass(model, x);
  Vector per_exit(model.num_heads());
  for (int k = 0; k < model.num_heads(); ++k) per_exit(k) = mse(y, pass.heads[static_cast<std::size_t>(k)]);
  double loss = multi_exit_loss(per_exit, spec.exit_weights);
  if (spec.reg_strength > 0.0) loss += spec.reg_strength * reg_loss(model, pass, spec.entropy_weight).total;
  return loss;
}

}  // namespace mekan
