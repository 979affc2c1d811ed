#include "mekan/trainer.hpp"

#include "mekan/gradient.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace mekan {

void TrainConfig::validate() const {
  if (grid_schedule.empty()) throw ConfigError("train.grid_schedule", "must not be empty");
  for (std::size_t i = 0; i < grid_schedule.size(); ++i) {
    if (grid_schedule[i] < 1) throw ConfigError("train.grid_schedule", "grid sizes must be positive");
    if (i > 0 && grid_schedule[i] <= grid_schedule[i - 1])
      throw ConfigError("train.grid_schedule", "grid sizes must be strictly increasing");
  }
  if (steps_per_stage < 0) throw ConfigError("train.steps_per_stage", "must be nonnegative");
  if (iters_per_step < 1) throw ConfigError("train.iters_per_step", "must be positive");
  if (loss.reg_strength < 0.0) throw ConfigError("loss.reg_strength", "must be nonnegative");
  if (loss.entropy_weight < 0.0) throw ConfigError("loss.entropy_weight", "must be nonnegative");
  lbfgs.validate();
}

namespace {

ExitWeights initial_weights(const MultiExitKan& model, const TrainConfig& config) {
  const int heads = model.num_heads();
  if (config.learn_to_exit) {
    if (config.loss.exit_weights.is_learnable() && config.loss.exit_weights.size() == heads)
      return config.loss.exit_weights;
    return ExitWeights::learnable(heads);
  }
  if (config.loss.exit_weights.size() != heads)
    throw ConfigError("loss.exit_weights", "expected " + std::to_string(heads) + " exit weights, got " +
                                               std::to_string(config.loss.exit_weights.size()));
  return config.loss.exit_weights;
}

const Matrix& input_of(const ForwardPass& pass, const ActivationSite& site) {
  return pass.trunk_signals[static_cast<std::size_t>(site.layer)];
}

std::vector<double> column(const Matrix& m, int c) {
  std::vector<double> out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) out[static_cast<std::size_t>(r)] = m(r, c);
  return out;
}

// Transfer every activation to `grid_size` and/or widen its range. Samples
// come from one forward pass of the model before the change.
void transfer_grids(MultiExitKan& model, const Matrix& x, int grid_size, bool refine, bool widen, StageReport& report) {
  if (refine) {
    const ForwardPass pass = forward_pass(model, x);
    for_each_activation(model, [&](const ActivationSite& site, SplineActivation& act) {
      if (act.grid.num_intervals() == grid_size) return;
      const auto samples = column(input_of(pass, site), site.i);
      RefitResult r = refine_grid(act, grid_size, samples);
      report.max_refit_residual = std::max(report.max_refit_residual, r.residual_rms);
      report.rank_deficient_refit |= r.rank_deficient;
      act = std::move(r.activation);
    });
  }
  if (widen) {
    const ForwardPass pass = forward_pass(model, x);
    for_each_activation(model, [&](const ActivationSite& site, SplineActivation& act) {
      const auto samples = column(input_of(pass, site), site.i);
      RefitResult r = update_grid_range(act, samples);
      report.max_refit_residual = std::max(report.max_refit_residual, r.residual_rms);
      report.rank_deficient_refit |= r.rank_deficient;
      act = std::move(r.activation);
    });
  }
}

// Runs L-BFGS on one dataset, updating `model` and `weights` in place.
void optimize(MultiExitKan& model, ExitWeights& weights, const Dataset& data, const TrainConfig& config, int stage,
              StageReport& report) {
  LossSpec spec = config.loss;
  spec.exit_weights = weights;
  const Eigen::Index np = static_cast<Eigen::Index>(count_parameters(model));
  const Eigen::Index nl = weights.is_learnable() ? weights.size() : 0;

  Vector x0(np + nl);
  x0.head(np) = flatten_params(model);
  if (nl > 0) x0.tail(nl) = weights.logits();

  MultiExitKan work = model;
  auto unpack = [&](const Vector& v) {
    load_params(work, v.head(np));
    if (nl > 0) spec.exit_weights.set_logits(v.tail(nl));
  };
  Objective objective = [&](const Vector& v, Vector& grad) {
    unpack(v);
    GradientResult r = loss_and_grad(work, data.x, data.y, spec);
    grad = std::move(r.grad);
    return r.loss;
  };

  LbfgsConfig lbfgs = config.lbfgs;
  lbfgs.max_iters = config.steps_per_stage * config.iters_per_step;
  int last_iter = 0;
  IterationCallback on_iter = [&](const Vector& v, const IterationRecord& rec) {
    last_iter = rec.iter;
    if (!std::isfinite(rec.loss)) throw TrainingError(stage, rec.iter, "non-finite loss");
    if (nl > 0) report.exit_weight_history.push_back(softmax_weights(v.tail(nl)));
  };

  if (lbfgs.max_iters == 0) {
    report.final_loss = joint_loss(model, data.x, data.y, spec);
    return;
  }
  try {
    MinimizeResult result = minimize(objective, x0, lbfgs, on_iter);
    unpack(result.x);
    model = work;
    if (nl > 0) weights.set_logits(result.x.tail(nl));
    report.trace = std::move(result.trace);
    report.final_loss = result.loss;
  } catch (const NonFiniteLossError& e) {
    throw TrainingError(stage, last_iter,
                        "stage " + std::to_string(stage) + ", iteration " + std::to_string(last_iter) + ": " + e.what());
  } catch (const TrainingError&) {
    throw;
  } catch (const Error& e) {
    throw TrainingError(stage, last_iter,
                        "stage " + std::to_string(stage) + ", iteration " + std::to_string(last_iter) + ": " + e.what());
  }
}

double safe_joint_loss(const MultiExitKan& model, const Dataset& data, const LossSpec& spec) {
  try {
    return joint_loss(model, data.x, data.y, spec);
  } catch (const Error&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

}  // namespace

FitResult fit(MultiExitKan model, const Dataset& train, const TrainConfig& config) {
  config.validate();
  train.validate();
  if (train.x.cols() != model.shape.input_dim() || train.y.cols() != model.shape.output_dim())
    throw DataError("training data dimensions do not match the model shape");

  FitResult out{std::move(model), {}, ExitWeights::uniform(1)};
  ExitWeights weights = initial_weights(out.model, config);
  for (std::size_t s = 0; s < config.grid_schedule.size(); ++s) {
    StageReport report;
    report.grid_size = config.grid_schedule[s];
    LossSpec spec = config.loss;
    spec.exit_weights = weights;
    report.loss_before_refit = safe_joint_loss(out.model, train, spec);
    transfer_grids(out.model, train.x, report.grid_size, true, config.update_grid, report);
    report.loss_after_refit = safe_joint_loss(out.model, train, spec);
    optimize(out.model, weights, train, config, static_cast<int>(s), report);
    out.stages.push_back(std::move(report));
  }
  out.exit_weights = weights;
  return out;
}

EvalReport evaluate(const MultiExitKan& model, const Dataset& test) {
  if (test.size() == 0) throw DataError("evaluate: empty test set");
  if (test.y.cols() != model.shape.output_dim()) throw DataError("evaluate: target width does not match the model");
  const auto heads = forward(model, test.x);
  EvalReport report;
  report.n_test = static_cast<int>(test.size());

  const Eigen::RowVectorXd mean = test.y.colwise().mean();
  double sst = 0.0;
  for (Eigen::Index r = 0; r < test.y.rows(); ++r) sst += (test.y.row(r) - mean).squaredNorm();
  report.r2_defined = sst > 0.0;

  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < heads.size(); ++k) {
    const double sse = (test.y - heads[k]).squaredNorm();
    const double rmse = std::sqrt(sse / static_cast<double>(test.y.size()));
    report.rmse.push_back(rmse);
    report.r2.push_back(report.r2_defined ? 1.0 - sse / sst : std::numeric_limits<double>::quiet_NaN());
    if (rmse < best) {
      best = rmse;
      report.best_exit = static_cast<int>(k);
    }
  }
  return report;
}

ContinualResult fit_continual(MultiExitKan model, const std::vector<Dataset>& phases, const Dataset& full_domain,
                              const TrainConfig& config) {
  config.validate();
  if (phases.empty()) throw DataError("fit_continual: needs at least one phase");
  ContinualResult out{std::move(model), {}, {}, ExitWeights::uniform(1)};
  ExitWeights weights = initial_weights(out.model, config);
  for (std::size_t p = 0; p < phases.size(); ++p) {
    phases[p].validate();
    StageReport report;
    report.grid_size = out.model.trunk.front().acts.front().grid.num_intervals();
    LossSpec spec = config.loss;
    spec.exit_weights = weights;
    report.loss_before_refit = report.loss_after_refit = safe_joint_loss(out.model, phases[p], spec);
    optimize(out.model, weights, phases[p], config, static_cast<int>(p), report);
    out.phases.push_back(std::move(report));
    out.per_phase.push_back(evaluate(out.model, full_domain));
  }
  out.exit_weights = weights;
  return out;
}

Rollout rollout(const MultiExitKan& model, const Vector& x0, int n_steps, int exit_index) {
  if (model.shape.input_dim() != model.shape.output_dim())
    throw DataError("rollout needs a model whose input and output widths match");
  if (x0.size() != model.shape.input_dim()) throw DataError("rollout: initial state has the wrong dimension");
  const int head = exit_index < 0 ? model.num_heads() - 1 : exit_index;
  if (head >= model.num_heads()) throw DataError("rollout: exit index out of range");

  Rollout out;
  out.trajectory.resize(std::max(n_steps, 0), x0.size());
  Matrix state = x0.transpose();
  for (int k = 0; k < n_steps; ++k) {
    const auto heads = forward(model, state);
    state = heads[static_cast<std::size_t>(head)];
    if (!state.allFinite()) {
      out.truncated = true;
      out.trajectory.conservativeResize(k, Eigen::NoChange);
      break;
    }
    out.trajectory.row(k) = state.row(0);
  }
  return out;
}

int divergence_time(const Matrix& pred, const Matrix& truth, double threshold) {
  const auto n = truth.rows();
  for (Eigen::Index k = 0; k < n; ++k) {
    if (k >= pred.rows()) return static_cast<int>(k + 1);
    const double err = (pred.row(k) - truth.row(k)).cwiseAbs().maxCoeff();
    if (!(err <= threshold)) return static_cast<int>(k + 1);
  }
  return static_cast<int>(n);
}

}  // namespace mekan
