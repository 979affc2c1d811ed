#include "mekan/network.hpp"

#include <cmath>
#include <string>

namespace mekan {

void KanShape::validate() const {
  if (widths.size() < 2) throw ShapeError("KAN shape needs at least two widths");
  for (int w : widths)
    if (w < 1) throw ShapeError("KAN widths must be positive");
}

namespace {

KanLayer make_layer(int in_width, int out_width, const BuildOptions& options, std::mt19937_64& rng) {
  const SplineGrid grid(options.grid_size, options.spline_order, options.grid_lo, options.grid_hi);
  KanLayer layer{in_width, out_width, {}};
  layer.acts.reserve(static_cast<std::size_t>(in_width * out_width));
  for (int k = 0; k < in_width * out_width; ++k)
    layer.acts.push_back(SplineActivation::random(grid, options.base_kind, options.init_sigma, rng));
  return layer;
}

void apply_layer(const KanLayer& layer, const double* in, double* out) {
  for (int j = 0; j < layer.out_width; ++j) {
    double sum = 0.0;
    for (int i = 0; i < layer.in_width; ++i) sum += eval_activation(layer.at(j, i), in[i]);
    out[j] = sum;
  }
}

Matrix apply_layer_batch(const KanLayer& layer, const Matrix& in) {
  Matrix out(in.rows(), layer.out_width);
  const Eigen::Index n = in.rows();
#pragma omp parallel for schedule(static)
  for (Eigen::Index r = 0; r < n; ++r) apply_layer(layer, in.row(r).data(), out.row(r).data());
  return out;
}

}  // namespace

MultiExitKan build(const KanShape& shape, bool multi_exit, const BuildOptions& options) {
  shape.validate();
  std::mt19937_64 rng(options.seed);
  MultiExitKan model;
  model.shape = shape;
  const int depth = shape.depth();
  model.multi_exit = multi_exit && depth >= 2;
  for (int l = 0; l < depth; ++l) model.trunk.push_back(make_layer(shape.widths[l], shape.widths[l + 1], options, rng));
  if (model.multi_exit)
    for (int l = 0; l + 1 < depth; ++l) model.exits.push_back(make_layer(shape.widths[l], shape.output_dim(), options, rng));
  return model;
}

void check_finite(const Matrix& x, const char* what) {
  if (!x.allFinite()) throw DataError(std::string(what) + " contains non-finite values");
}

ForwardPass forward_pass(const MultiExitKan& model, const Matrix& x) {
  if (x.cols() != model.shape.input_dim())
    throw DataError("input has " + std::to_string(x.cols()) + " columns, model expects " +
                    std::to_string(model.shape.input_dim()));
  check_finite(x, "input");
  ForwardPass pass;
  pass.trunk_signals.reserve(model.trunk.size() + 1);
  pass.trunk_signals.push_back(x);
  for (const auto& layer : model.trunk) pass.trunk_signals.push_back(apply_layer_batch(layer, pass.trunk_signals.back()));
  for (std::size_t k = 0; k < model.exits.size(); ++k)
    pass.heads.push_back(apply_layer_batch(model.exits[k], pass.trunk_signals[k]));
  pass.heads.push_back(pass.trunk_signals.back());
  return pass;
}

std::vector<Matrix> forward(const MultiExitKan& model, const Matrix& x) { return forward_pass(model, x).heads; }

std::vector<Matrix> forward_serial(const MultiExitKan& model, const Matrix& x) {
  if (x.cols() != model.shape.input_dim()) throw DataError("input column count does not match the model");
  check_finite(x, "input");
  const int heads = model.num_heads();
  const int m = model.shape.output_dim();
  std::vector<Matrix> out(static_cast<std::size_t>(heads), Matrix(x.rows(), m));
  std::vector<std::vector<double>> signals(model.trunk.size() + 1);
  for (std::size_t l = 0; l <= model.trunk.size(); ++l) signals[l].resize(static_cast<std::size_t>(model.shape.widths[l]));

  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    for (int c = 0; c < x.cols(); ++c) signals[0][c] = x(r, c);
    for (std::size_t l = 0; l < model.trunk.size(); ++l) apply_layer(model.trunk[l], signals[l].data(), signals[l + 1].data());
    for (std::size_t k = 0; k < model.exits.size(); ++k) apply_layer(model.exits[k], signals[k].data(), out[k].row(r).data());
    for (int c = 0; c < m; ++c) out.back()(r, c) = signals.back()[c];
  }
  return out;
}

std::size_t count_activations(const MultiExitKan& model) {
  std::size_t total = 0;
  for (const auto& layer : model.trunk) total += layer.acts.size();
  for (const auto& layer : model.exits) total += layer.acts.size();
  return total;
}

std::size_t count_parameters(const MultiExitKan& model) {
  std::size_t total = 0;
  for_each_activation(model, [&](const ActivationSite&, const SplineActivation& act) { total += act.coeffs.size(); });
  return total;
}

void for_each_activation(const MultiExitKan& model,
                         const std::function<void(const ActivationSite&, const SplineActivation&)>& fn) {
  auto visit = [&](const KanLayer& layer, bool is_exit, int index) {
    for (int j = 0; j < layer.out_width; ++j)
      for (int i = 0; i < layer.in_width; ++i) fn(ActivationSite{is_exit, index, j, i}, layer.at(j, i));
  };
  for (std::size_t l = 0; l < model.trunk.size(); ++l) visit(model.trunk[l], false, static_cast<int>(l));
  for (std::size_t k = 0; k < model.exits.size(); ++k) visit(model.exits[k], true, static_cast<int>(k));
}

void for_each_activation(MultiExitKan& model, const std::function<void(const ActivationSite&, SplineActivation&)>& fn) {
  auto visit = [&](KanLayer& layer, bool is_exit, int index) {
    for (int j = 0; j < layer.out_width; ++j)
      for (int i = 0; i < layer.in_width; ++i) fn(ActivationSite{is_exit, index, j, i}, layer.at(j, i));
  };
  for (std::size_t l = 0; l < model.trunk.size(); ++l) visit(model.trunk[l], false, static_cast<int>(l));
  for (std::size_t k = 0; k < model.exits.size(); ++k) visit(model.exits[k], true, static_cast<int>(k));
}

Vector flatten_params(const MultiExitKan& model) {
  Vector params(static_cast<Eigen::Index>(count_parameters(model)));
  Eigen::Index pos = 0;
  for_each_activation(model, [&](const ActivationSite&, const SplineActivation& act) {
    for (double c : act.coeffs) params(pos++) = c;
  });
  return params;
}

void load_params(MultiExitKan& model, const Vector& params) {
  const auto expected = count_parameters(model);
  if (static_cast<std::size_t>(params.size()) != expected)
    throw ShapeError("parameter vector has length " + std::to_string(params.size()) + ", model expects " +
                     std::to_string(expected));
  Eigen::Index pos = 0;
  for_each_activation(model, [&](const ActivationSite&, SplineActivation& act) {
    for (double& c : act.coeffs) c = params(pos++);
  });
}

}  // namespace mekan
