#include "mekan/config.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <initializer_list>

namespace mekan {

using nlohmann::json;

std::string_view to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::Sinc: return "sinc";
    case TaskKind::Sines2D: return "sines2d";
    case TaskKind::Feynman: return "feynman";
    case TaskKind::Ikeda: return "ikeda";
    case TaskKind::Ecosystem: return "ecosystem";
    case TaskKind::FivePeaks: return "five_peaks";
    case TaskKind::Csv: return "csv";
  }
  return "sinc";
}

namespace {

TaskKind parse_task_kind(const std::string& name, const std::string& path) {
  for (TaskKind k : {TaskKind::Sinc, TaskKind::Sines2D, TaskKind::Feynman, TaskKind::Ikeda, TaskKind::Ecosystem,
                     TaskKind::FivePeaks, TaskKind::Csv})
    if (to_string(k) == name) return k;
  throw ConfigError(path, "unknown task '" + name + "' (expected sinc, sines2d, feynman, ikeda, ecosystem, five_peaks or csv)");
}

// Typed access to one JSON object; rejects keys outside `allowed`.
class Section {
 public:
  Section(const json& doc, std::string path, std::initializer_list<const char*> allowed)
      : doc_(doc), path_(std::move(path)) {
    if (!doc.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
    for (const auto& [key, value] : doc.items()) {
      (void)value;
      if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
        throw ConfigError(key_path(key), "unknown key");
    }
  }

  std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  const json* find(const char* key) const {
    auto it = doc_.find(key);
    return it == doc_.end() ? nullptr : &*it;
  }

  void read(const char* key, int& out) const {
    if (const json* v = find(key)) {
      if (!v->is_number_integer()) throw ConfigError(key_path(key), "expected an integer");
      out = v->get<int>();
    }
  }
  void read(const char* key, std::uint64_t& out) const {
    if (const json* v = find(key)) {
      if (!v->is_number_integer() || (v->is_number_integer() && !v->is_number_unsigned() && v->get<long long>() < 0))
        throw ConfigError(key_path(key), "expected a nonnegative integer");
      out = v->get<std::uint64_t>();
    }
  }
  void read(const char* key, double& out) const {
    if (const json* v = find(key)) {
      if (!v->is_number()) throw ConfigError(key_path(key), "expected a number");
      out = v->get<double>();
    }
  }
  void read(const char* key, bool& out) const {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) throw ConfigError(key_path(key), "expected true or false");
      out = v->get<bool>();
    }
  }
  void read(const char* key, std::string& out) const {
    if (const json* v = find(key)) {
      if (!v->is_string()) throw ConfigError(key_path(key), "expected a string");
      out = v->get<std::string>();
    }
  }
  template <typename T>
  void read(const char* key, std::vector<T>& out) const {
    if (const json* v = find(key)) {
      if (!v->is_array()) throw ConfigError(key_path(key), "expected an array");
      std::vector<T> items;
      for (std::size_t n = 0; n < v->size(); ++n) {
        const json& e = (*v)[n];
        const std::string at = key_path(key) + "[" + std::to_string(n) + "]";
        if constexpr (std::is_same_v<T, int>) {
          if (!e.is_number_integer()) throw ConfigError(at, "expected an integer");
        } else if constexpr (std::is_same_v<T, double>) {
          if (!e.is_number()) throw ConfigError(at, "expected a number");
        } else {
          if (!e.is_string()) throw ConfigError(at, "expected a string");
        }
        items.push_back(e.get<T>());
      }
      out = std::move(items);
    }
  }

 private:
  const json& doc_;
  std::string path_;
};

void read_ranges(const Section& s, const char* key, std::vector<std::pair<double, double>>& out) {
  const json* v = s.find(key);
  if (!v) return;
  if (!v->is_array()) throw ConfigError(s.key_path(key), "expected an array of [lo, hi] pairs");
  out.clear();
  for (std::size_t n = 0; n < v->size(); ++n) {
    const json& e = (*v)[n];
    const std::string at = s.key_path(key) + "[" + std::to_string(n) + "]";
    if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
      throw ConfigError(at, "expected [lo, hi]");
    const double lo = e[0].get<double>();
    const double hi = e[1].get<double>();
    if (!(lo < hi)) throw ConfigError(at, "lo must be below hi");
    out.emplace_back(lo, hi);
  }
}

int input_dim_of(const TaskConfig& t) {
  switch (t.kind) {
    case TaskKind::Sinc: return 1;
    case TaskKind::Sines2D: return 2;
    case TaskKind::Feynman: return static_cast<int>(feynman_equation(t.feynman_id).variables.size());
    case TaskKind::Ikeda: return 2;
    case TaskKind::Ecosystem: return 3;
    case TaskKind::FivePeaks: return 1;
    case TaskKind::Csv: return static_cast<int>(t.features.size());
  }
  return 1;
}

int output_dim_of(const TaskConfig& t) {
  switch (t.kind) {
    case TaskKind::Ikeda: return 2;
    case TaskKind::Ecosystem: return 3;
    default: return 1;
  }
}

int head_count(const ModelConfig& m) { return m.multi_exit && m.shape.depth() >= 2 ? m.shape.depth() : 1; }

void validate(const RunConfig& c) {
  const TaskConfig& t = c.task;
  if (t.n_train < 1) throw ConfigError("task.n_train", "must be positive");
  if (t.n_test < 1) throw ConfigError("task.n_test", "must be positive");
  if (t.transient < 0) throw ConfigError("task.transient", "must be nonnegative");
  if (!(t.dt > 0.0)) throw ConfigError("task.dt", "must be positive");
  if (!(t.dt_sample >= t.dt)) throw ConfigError("task.dt_sample", "must be at least dt");
  if (t.n_per_peak < 1) throw ConfigError("task.n_per_peak", "must be positive");
  if (t.n_eval < 1) throw ConfigError("task.n_eval", "must be positive");
  for (std::size_t n = 1; n < t.centers.size(); ++n)
    if (!(t.centers[n] > t.centers[n - 1])) throw ConfigError("task.centers", "must be strictly increasing");
  if (t.kind == TaskKind::Feynman) {
    try {
      (void)feynman_equation(t.feynman_id);
    } catch (const DataError& e) {
      throw ConfigError("task.feynman_id", e.what());
    }
  }
  if (t.kind == TaskKind::Csv) {
    if (t.csv_path.empty()) throw ConfigError("task.csv_path", "required for the csv task");
    if (t.target.empty()) throw ConfigError("task.target", "required for the csv task");
  }

  try {
    c.model.shape.validate();
  } catch (const Error& e) {
    throw ConfigError("model.shape", e.what());
  }
  if (c.model.spline_order < 0 || c.model.spline_order > kMaxSplineOrder)
    throw ConfigError("model.spline_order", "out of range");
  if (!(c.model.grid_lo < c.model.grid_hi)) throw ConfigError("model.grid_range", "lo must be below hi");
  if (!(c.model.init_sigma >= 0.0)) throw ConfigError("model.init_sigma", "must be nonnegative");
  const bool csv_without_features = t.kind == TaskKind::Csv && t.features.empty();
  if (!csv_without_features && c.model.shape.input_dim() != input_dim_of(t))
    throw ConfigError("model.shape", "input width " + std::to_string(c.model.shape.input_dim()) +
                                         " does not match the task's " + std::to_string(input_dim_of(t)) + " inputs");
  if (c.model.shape.output_dim() != output_dim_of(t))
    throw ConfigError("model.shape", "output width " + std::to_string(c.model.shape.output_dim()) +
                                         " does not match the task's " + std::to_string(output_dim_of(t)) + " outputs");
  if (!t.ranges.empty() && t.ranges.size() != 1 &&
      static_cast<int>(t.ranges.size()) != c.model.shape.input_dim())
    throw ConfigError("task.ranges", "needs one range or one per input");

  (void)make_train_config(c, head_count(c.model));
}

}  // namespace

RunConfig parse_run_config(const json& doc) {
  RunConfig c;
  const Section root(doc, "", {"task", "model", "loss", "train", "seed", "output_dir"});
  root.read("seed", c.seed);
  root.read("output_dir", c.output_dir);

  if (const json* t = root.find("task")) {
    const Section s(*t, "task",
                    {"kind", "n_train", "n_test", "feynman_id", "ranges", "transient", "mu", "dt", "dt_sample",
                     "n_per_peak", "centers", "n_eval", "csv_path", "target", "features"});
    std::string kind{to_string(c.task.kind)};
    s.read("kind", kind);
    c.task.kind = parse_task_kind(kind, "task.kind");
    if (c.task.kind == TaskKind::Ikeda || c.task.kind == TaskKind::Ecosystem) c.task.n_train = 2000;
    s.read("n_train", c.task.n_train);
    s.read("n_test", c.task.n_test);
    s.read("feynman_id", c.task.feynman_id);
    read_ranges(s, "ranges", c.task.ranges);
    s.read("transient", c.task.transient);
    s.read("mu", c.task.mu);
    s.read("dt", c.task.dt);
    s.read("dt_sample", c.task.dt_sample);
    s.read("n_per_peak", c.task.n_per_peak);
    std::vector<double> centers(c.task.centers.begin(), c.task.centers.end());
    s.read("centers", centers);
    if (centers.size() != c.task.centers.size()) throw ConfigError("task.centers", "expected 5 peak centers");
    std::copy(centers.begin(), centers.end(), c.task.centers.begin());
    s.read("n_eval", c.task.n_eval);
    s.read("csv_path", c.task.csv_path);
    s.read("target", c.task.target);
    s.read("features", c.task.features);
  }

  if (const json* m = root.find("model")) {
    const Section s(*m, "model", {"shape", "multi_exit", "base", "spline_order", "grid_range", "init_sigma"});
    s.read("shape", c.model.shape.widths);
    s.read("multi_exit", c.model.multi_exit);
    std::string base{to_string(c.model.base_kind)};
    s.read("base", base);
    try {
      c.model.base_kind = parse_base_kind(base);
    } catch (const ConfigError& e) {
      throw ConfigError("model.base", e.what());
    }
    s.read("spline_order", c.model.spline_order);
    std::vector<double> range{c.model.grid_lo, c.model.grid_hi};
    s.read("grid_range", range);
    if (range.size() != 2) throw ConfigError("model.grid_range", "expected [lo, hi]");
    c.model.grid_lo = range[0];
    c.model.grid_hi = range[1];
    s.read("init_sigma", c.model.init_sigma);
  }

  if (const json* l = root.find("loss")) {
    const Section s(*l, "loss", {"exit_weights", "learn_to_exit", "reg_strength", "entropy_weight"});
    s.read("exit_weights", c.exit_weights);
    s.read("learn_to_exit", c.learn_to_exit);
    s.read("reg_strength", c.reg_strength);
    s.read("entropy_weight", c.entropy_weight);
  }

  if (const json* tr = root.find("train")) {
    const Section s(*tr, "train", {"grid_schedule", "steps_per_stage", "iters_per_step", "update_grid", "lbfgs"});
    s.read("grid_schedule", c.grid_schedule);
    s.read("steps_per_stage", c.steps_per_stage);
    s.read("iters_per_step", c.iters_per_step);
    s.read("update_grid", c.update_grid);
    if (const json* lb = s.find("lbfgs")) {
      const Section o(*lb, "train.lbfgs",
                      {"history_size", "learning_rate", "tol_grad", "tol_param", "tol_curvature", "wolfe_c1", "wolfe_c2",
                       "max_line_search_evals"});
      o.read("history_size", c.lbfgs.history_size);
      o.read("learning_rate", c.lbfgs.learning_rate);
      o.read("tol_grad", c.lbfgs.tol_grad);
      o.read("tol_param", c.lbfgs.tol_param);
      o.read("tol_curvature", c.lbfgs.tol_curvature);
      o.read("wolfe_c1", c.lbfgs.wolfe_c1);
      o.read("wolfe_c2", c.lbfgs.wolfe_c2);
      o.read("max_line_search_evals", c.lbfgs.max_line_search_evals);
    }
  }

  validate(c);
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file " + path.string());
  json doc;
  try {
    doc = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError("", "config file " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_run_config(doc);
}

json to_json(const RunConfig& c) {
  json ranges = json::array();
  for (const auto& [lo, hi] : c.task.ranges) ranges.push_back({lo, hi});
  return {
      {"task",
       {{"kind", std::string(to_string(c.task.kind))},
        {"n_train", c.task.n_train},
        {"n_test", c.task.n_test},
        {"feynman_id", c.task.feynman_id},
        {"ranges", std::move(ranges)},
        {"transient", c.task.transient},
        {"mu", c.task.mu},
        {"dt", c.task.dt},
        {"dt_sample", c.task.dt_sample},
        {"n_per_peak", c.task.n_per_peak},
        {"centers", c.task.centers},
        {"n_eval", c.task.n_eval},
        {"csv_path", c.task.csv_path},
        {"target", c.task.target},
        {"features", c.task.features}}},
      {"model",
       {{"shape", c.model.shape.widths},
        {"multi_exit", c.model.multi_exit},
        {"base", std::string(to_string(c.model.base_kind))},
        {"spline_order", c.model.spline_order},
        {"grid_range", {c.model.grid_lo, c.model.grid_hi}},
        {"init_sigma", c.model.init_sigma}}},
      {"loss",
       {{"exit_weights", c.exit_weights},
        {"learn_to_exit", c.learn_to_exit},
        {"reg_strength", c.reg_strength},
        {"entropy_weight", c.entropy_weight}}},
      {"train",
       {{"grid_schedule", c.grid_schedule},
        {"steps_per_stage", c.steps_per_stage},
        {"iters_per_step", c.iters_per_step},
        {"update_grid", c.update_grid},
        {"lbfgs",
         {{"history_size", c.lbfgs.history_size},
          {"learning_rate", c.lbfgs.learning_rate},
          {"tol_grad", c.lbfgs.tol_grad},
          {"tol_param", c.lbfgs.tol_param},
          {"tol_curvature", c.lbfgs.tol_curvature},
          {"wolfe_c1", c.lbfgs.wolfe_c1},
          {"wolfe_c2", c.lbfgs.wolfe_c2},
          {"max_line_search_evals", c.lbfgs.max_line_search_evals}}}}},
      {"seed", c.seed},
      {"output_dir", c.output_dir},
  };
}

BuildOptions make_build_options(const RunConfig& c) {
  BuildOptions o;
  o.base_kind = c.model.base_kind;
  o.grid_size = c.grid_schedule.empty() ? 3 : c.grid_schedule.front();
  o.spline_order = c.model.spline_order;
  o.grid_lo = c.model.grid_lo;
  o.grid_hi = c.model.grid_hi;
  o.init_sigma = c.model.init_sigma;
  o.seed = c.seed;
  return o;
}

TrainConfig make_train_config(const RunConfig& c, int num_heads) {
  TrainConfig t;
  t.grid_schedule = c.grid_schedule;
  t.steps_per_stage = c.steps_per_stage;
  t.iters_per_step = c.iters_per_step;
  t.seed = c.seed;
  t.learn_to_exit = c.learn_to_exit;
  t.update_grid = c.update_grid;
  t.lbfgs = c.lbfgs;
  t.loss.reg_strength = c.reg_strength;
  t.loss.entropy_weight = c.entropy_weight;
  if (c.learn_to_exit) {
    t.loss.exit_weights = ExitWeights::learnable(num_heads);
  } else if (c.exit_weights.empty()) {
    t.loss.exit_weights = ExitWeights::uniform(num_heads);
  } else {
    if (static_cast<int>(c.exit_weights.size()) != num_heads)
      throw ConfigError("loss.exit_weights", "expected " + std::to_string(num_heads) + " weights for this model, got " +
                                                 std::to_string(c.exit_weights.size()));
    try {
      t.loss.exit_weights = ExitWeights::fixed(c.exit_weights);
    } catch (const ConfigError& e) {
      throw ConfigError("loss.exit_weights", e.what());
    }
  }
  t.validate();
  return t;
}

DatasetPair make_task_data(const TaskConfig& t, std::uint64_t seed) {
  switch (t.kind) {
    case TaskKind::Sinc:
    case TaskKind::Sines2D:
    case TaskKind::Feynman: {
      RegressionSpec spec;
      spec.target = t.kind == TaskKind::Sinc      ? RegressionTarget::Sinc1D
                    : t.kind == TaskKind::Sines2D ? RegressionTarget::Sines2D
                                                  : RegressionTarget::Feynman;
      spec.feynman_id = t.feynman_id;
      spec.ranges = t.ranges;
      return gen_regression(spec, t.n_train, t.n_test, seed);
    }
    case TaskKind::Ikeda: {
      IkedaDataOptions o;
      o.n_train = t.n_train;
      o.n_test = t.n_test;
      o.transient = t.transient;
      o.seed = seed;
      o.params.mu = t.mu;
      return ikeda_dataset(o);
    }
    case TaskKind::Ecosystem: {
      EcosystemDataOptions o;
      o.dt = t.dt;
      o.dt_sample = t.dt_sample;
      o.n_train = t.n_train;
      o.n_test = t.n_test;
      o.transient = t.transient;
      o.seed = seed;
      return ecosystem_dataset(o);
    }
    case TaskKind::Csv: {
      const Dataset all = load_csv(t.csv_path, t.target, t.features);
      return split(all, t.n_train, t.n_test, seed);
    }
    case TaskKind::FivePeaks: break;
  }
  throw ConfigError("task.kind", "five_peaks is a continual-learning task; use the continual command");
}

RunOutcome run_training(const RunConfig& c) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto [train, test] = make_task_data(c.task, c.seed);
  if (train.x.cols() != c.model.shape.input_dim())
    throw ConfigError("model.shape", "input width does not match the " + std::to_string(train.x.cols()) +
                                         " data columns");
  MultiExitKan model = build(c.model.shape, c.model.multi_exit, make_build_options(c));
  const TrainConfig tc = make_train_config(c, model.num_heads());
  RunOutcome out{fit(std::move(model), train, tc), {}, 0.0};
  out.test = evaluate(out.fit.model, test);
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

ContinualOutcome run_continual(const RunConfig& c) {
  if (c.task.kind != TaskKind::FivePeaks) throw ConfigError("task.kind", "the continual command needs five_peaks");
  const auto t0 = std::chrono::steady_clock::now();
  const auto phases = gen_five_peaks(c.task.n_per_peak, c.task.centers);
  const Dataset full = five_peaks_full_domain(c.task.n_eval, c.task.centers);
  MultiExitKan model = build(c.model.shape, c.model.multi_exit, make_build_options(c));
  const TrainConfig tc = make_train_config(c, model.num_heads());
  ContinualOutcome out{fit_continual(std::move(model), phases, full, tc), 0.0};
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace mekan
