#include "mekan/commands.hpp"

#include "mekan/config.hpp"
#include "mekan/parallel.hpp"
#include "mekan/serialize.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

namespace mekan {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<int> threads;
};

std::ofstream open_out(const fs::path& path) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path.string());
  f.precision(17);
  return f;
}

void write_json(const fs::path& path, const json& doc) { open_out(path) << doc.dump(2) << '\n'; }

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create directory " + dir.string() + ": " + ec.message());
}

RunConfig load_with_overrides(const CommonFlags& flags) {
  if (flags.config.empty()) throw ConfigError("", "--config is required");
  RunConfig c = load_run_config(flags.config);
  if (flags.seed) c.seed = *flags.seed;
  if (!flags.out.empty()) c.output_dir = flags.out;
  return c;
}

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

json exit_weights_json(const RunConfig& c, const ExitWeights& final_weights) {
  json w = {{"mode", final_weights.is_learnable() ? "learnable" : "fixed"},
            {"raw", c.exit_weights},
            {"normalized", to_std(final_weights.weights())}};
  if (final_weights.is_learnable()) w["logits"] = to_std(final_weights.logits());
  return w;
}

json stage_json(const StageReport& s) {
  return {{"grid_size", s.grid_size},
          {"loss_before_refit", s.loss_before_refit},
          {"loss_after_refit", s.loss_after_refit},
          {"max_refit_residual", s.max_refit_residual},
          {"rank_deficient_refit", s.rank_deficient_refit},
          {"iterations", s.trace.records.size()},
          {"stop_reason", std::string(to_string(s.trace.stop_reason))},
          {"line_search_failed", s.trace.line_search_failed},
          {"final_loss", s.final_loss}};
}

json eval_json(const EvalReport& r) {
  return {{"rmse", r.rmse}, {"r2", r.r2}, {"r2_defined", r.r2_defined}, {"best_exit", r.best_exit}, {"n_test", r.n_test}};
}

void write_metrics_csv(const fs::path& path, const EvalReport& r) {
  auto f = open_out(path);
  f << "exit,rmse,r2\n";
  for (std::size_t k = 0; k < r.rmse.size(); ++k) {
    f << k << ',' << r.rmse[k] << ',';
    if (r.r2_defined) f << r.r2[k];
    f << '\n';
  }
}

void print_eval_table(std::ostream& out, const EvalReport& r) {
  out << "exit      rmse            r2\n";
  for (std::size_t k = 0; k < r.rmse.size(); ++k) {
    out << std::setw(4) << k << "  " << std::setw(14) << std::setprecision(6) << r.rmse[k] << "  ";
    if (r.r2_defined)
      out << std::setw(12) << r.r2[k];
    else
      out << std::setw(12) << "undefined";
    out << (static_cast<int>(k) == r.best_exit ? "  *" : "") << '\n';
  }
}

json manifest_base(const std::string& command, const RunConfig& c) {
  return {{"format", "mekan-manifest"},
          {"format_version", 1},
          {"command", command},
          {"seed", c.seed},
          {"config", to_json(c)},
          {"threads", max_threads()}};
}

int cmd_train(const CommonFlags& flags, std::ostream& out) {
  const RunConfig c = load_with_overrides(flags);
  RunOutcome run = run_training(c);

  const fs::path dir = c.output_dir;
  ensure_dir(dir);
  save_model(run.fit.model, dir / "model.json");
  write_metrics_csv(dir / "metrics.csv", run.test);
  for (std::size_t s = 0; s < run.fit.stages.size(); ++s) {
    auto f = open_out(dir / ("trace_stage" + std::to_string(s) + ".csv"));
    write_trace_csv(f, run.fit.stages[s].trace);
  }
  json manifest = manifest_base("train", c);
  manifest["heads"] = run.fit.model.num_heads();
  manifest["exit_weights"] = exit_weights_json(c, run.fit.exit_weights);
  manifest["stages"] = json::array();
  for (const auto& s : run.fit.stages) manifest["stages"].push_back(stage_json(s));
  manifest["test"] = eval_json(run.test);
  manifest["wall_clock_seconds"] = run.seconds;
  write_json(dir / "manifest.json", manifest);

  out << "task " << to_string(c.task.kind) << ", " << run.fit.model.num_heads() << " head(s), "
      << std::setprecision(3) << run.seconds << " s\n";
  print_eval_table(out, run.test);
  return 0;
}

Dataset read_dataset_csv(const fs::path& path, int n_inputs, int n_outputs) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string header;
  std::getline(in, header);
  std::vector<std::string> names;
  std::stringstream hs(header);
  for (std::string cell; std::getline(hs, cell, ',');) names.push_back(cell);
  if (static_cast<int>(names.size()) != n_inputs + n_outputs)
    throw DataError(path.string() + ": expected " + std::to_string(n_inputs + n_outputs) +
                    " columns (features then targets), found " + std::to_string(names.size()));
  const std::string target = names.back();
  std::vector<std::string> features(names.begin(), names.begin() + n_inputs);
  if (n_outputs == 1) return load_csv(path, target, features);
  // Multi-output files: load each target column against the same features.
  Dataset first = load_csv(path, names[static_cast<std::size_t>(n_inputs)], features);
  Matrix y(first.size(), n_outputs);
  y.col(0) = first.y.col(0);
  for (int o = 1; o < n_outputs; ++o)
    y.col(o) = load_csv(path, names[static_cast<std::size_t>(n_inputs + o)], features).y.col(0);
  first.y = std::move(y);
  return first;
}

int cmd_eval(const CommonFlags& flags, const std::string& model_path, const std::string& data_path,
             std::ostream& out) {
  const MultiExitKan model = load_model(model_path);
  Dataset test;
  if (!data_path.empty()) {
    test = read_dataset_csv(data_path, model.shape.input_dim(), model.shape.output_dim());
  } else {
    const RunConfig c = load_with_overrides(flags);
    test = make_task_data(c.task, c.seed).second;
  }
  if (test.x.cols() != model.shape.input_dim()) throw DataError("test data width does not match the model");
  const EvalReport r = evaluate(model, test);
  print_eval_table(out, r);
  if (!flags.out.empty()) {
    ensure_dir(flags.out);
    write_metrics_csv(fs::path(flags.out) / "metrics.csv", r);
  }
  return 0;
}

std::vector<double> parse_doubles(const std::string& text, const std::string& what) {
  std::vector<double> values;
  std::stringstream ss(text);
  for (std::string cell; std::getline(ss, cell, ',');) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(cell, &used));
      if (used != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw ConfigError(what, "'" + cell + "' is not a number");
    }
  }
  return values;
}

struct ForecastOptions {
  std::string model;
  std::string task = "ikeda";
  int steps = 100;
  double threshold = kDefaultDivergenceThreshold;
  std::string x0;
  std::optional<int> exit;
};

int cmd_forecast(const CommonFlags& flags, const ForecastOptions& o, std::ostream& out) {
  RunConfig c;
  if (!flags.config.empty()) c = load_run_config(flags.config);
  if (flags.seed) c.seed = *flags.seed;
  if (o.task == "ikeda")
    c.task.kind = TaskKind::Ikeda;
  else if (o.task == "ecosystem")
    c.task.kind = TaskKind::Ecosystem;
  else
    throw ConfigError("--task", "expected ikeda or ecosystem");
  if (o.steps < 0) throw ConfigError("--steps", "must be nonnegative");

  const MultiExitKan model = load_model(o.model);
  const int dim = c.task.kind == TaskKind::Ikeda ? 2 : 3;
  if (model.shape.input_dim() != dim || model.shape.output_dim() != dim)
    throw DataError("model shape does not match the " + o.task + " state dimension " + std::to_string(dim));

  std::optional<DatasetPair> data;
  auto task_data = [&]() -> const DatasetPair& {
    if (!data) data = make_task_data(c.task, c.seed);
    return *data;
  };

  Vector x0(dim);
  if (!o.x0.empty()) {
    const auto v = parse_doubles(o.x0, "--x0");
    if (static_cast<int>(v.size()) != dim) throw ConfigError("--x0", "expected " + std::to_string(dim) + " values");
    for (int d = 0; d < dim; ++d) x0(d) = v[static_cast<std::size_t>(d)];
  } else {
    x0 = task_data().second.x.row(0).transpose();
  }

  int head = model.num_heads() - 1;
  if (o.exit) {
    head = *o.exit;
    if (head < 0 || head >= model.num_heads()) throw ConfigError("--exit", "out of range");
  } else if (model.num_heads() > 1) {
    head = evaluate(model, task_data().second).best_exit;
  }

  Matrix truth(o.steps, dim);
  if (c.task.kind == TaskKind::Ikeda) {
    if (o.steps > 0) truth = ikeda_trajectory({x0(0), x0(1)}, o.steps, IkedaParams{c.task.mu});
  } else {
    Vector s = x0;
    for (int k = 0; k < o.steps; ++k) {
      s = ecosystem_flow(s, c.task.dt_sample, c.task.dt);
      truth.row(k) = s.transpose();
    }
  }
  const Rollout roll = rollout(model, x0, o.steps, head);
  const int tdiv = divergence_time(roll.trajectory, truth, o.threshold);

  if (!flags.out.empty()) {
    const fs::path dir = flags.out;
    ensure_dir(dir);
    auto f = open_out(dir / "forecast.csv");
    f << "step";
    for (int d = 0; d < dim; ++d) f << ",truth_" << d;
    for (int d = 0; d < dim; ++d) f << ",pred_" << d;
    f << '\n';
    for (int k = 0; k < o.steps; ++k) {
      f << k + 1;
      for (int d = 0; d < dim; ++d) f << ',' << truth(k, d);
      for (int d = 0; d < dim; ++d) {
        f << ',';
        if (k < roll.trajectory.rows()) f << roll.trajectory(k, d);
      }
      f << '\n';
    }
    write_json(dir / "forecast.json", {{"task", o.task},
                                       {"steps", o.steps},
                                       {"threshold", o.threshold},
                                       {"exit", head},
                                       {"truncated", roll.truncated},
                                       {"divergence_time", tdiv}});
  }
  out << "divergence_time " << tdiv << '\n';
  return 0;
}

int cmd_continual(const CommonFlags& flags, std::ostream& out) {
  const RunConfig c = load_with_overrides(flags);
  const ContinualOutcome run = run_continual(c);
  const ContinualResult& r = run.result;

  const fs::path dir = c.output_dir;
  ensure_dir(dir);
  save_model(r.model, dir / "model.json");
  {
    auto f = open_out(dir / "phases.csv");
    f << "phase,exit,rmse,r2\n";
    for (std::size_t p = 0; p < r.per_phase.size(); ++p)
      for (std::size_t k = 0; k < r.per_phase[p].rmse.size(); ++k) {
        f << p << ',' << k << ',' << r.per_phase[p].rmse[k] << ',';
        if (r.per_phase[p].r2_defined) f << r.per_phase[p].r2[k];
        f << '\n';
      }
  }
  write_metrics_csv(dir / "metrics.csv", r.per_phase.back());
  for (std::size_t p = 0; p < r.phases.size(); ++p) {
    auto f = open_out(dir / ("trace_phase" + std::to_string(p) + ".csv"));
    write_trace_csv(f, r.phases[p].trace);
  }
  json manifest = manifest_base("continual", c);
  manifest["heads"] = r.model.num_heads();
  manifest["exit_weights"] = exit_weights_json(c, r.exit_weights);
  manifest["phases"] = json::array();
  for (std::size_t p = 0; p < r.phases.size(); ++p) {
    json ph = stage_json(r.phases[p]);
    ph["full_domain"] = eval_json(r.per_phase[p]);
    manifest["phases"].push_back(std::move(ph));
  }
  manifest["test"] = eval_json(r.per_phase.back());
  manifest["wall_clock_seconds"] = run.seconds;
  write_json(dir / "manifest.json", manifest);

  out << "full-domain error after the last phase\n";
  print_eval_table(out, r.per_phase.back());
  return 0;
}

int cmd_export(const CommonFlags& flags, const std::string& model_path, int samples, std::ostream& out) {
  if (flags.out.empty()) throw ConfigError("--out", "required");
  const MultiExitKan model = load_model(model_path);
  const auto files = export_activations(model, flags.out, samples);
  out << "wrote " << files.size() << " activation files to " << flags.out << '\n';
  return 0;
}

// ---- bench ------------------------------------------------------------------

struct BenchTask {
  std::string name;
  RunConfig multi;
  bool continual = false;
};

struct BenchOptions {
  std::string suite;
  std::vector<std::uint64_t> seeds{0};
  std::optional<int> steps;
  std::optional<int> n_train;
  std::optional<int> n_test;
  std::vector<int> grid_schedule;
  std::vector<std::string> data;
  std::string target;
};

RunConfig bench_config(TaskKind kind, std::vector<int> shape, std::vector<double> weights) {
  RunConfig c;
  c.task.kind = kind;
  c.model.shape.widths = std::move(shape);
  c.model.multi_exit = true;
  c.exit_weights = std::move(weights);
  return c;
}

std::vector<BenchTask> bench_tasks(const BenchOptions& o, std::ostream& err, int& skipped) {
  std::vector<BenchTask> tasks;
  if (o.suite == "regression") {
    tasks.push_back({"sinc", bench_config(TaskKind::Sinc, {1, 2, 2, 2, 1}, {1, 2, 3, 4})});
    tasks.push_back({"sines2d", bench_config(TaskKind::Sines2D, {2, 3, 2, 1}, {1, 2, 1})});
  } else if (o.suite == "feynman") {
    for (const auto& eq : feynman_equations()) {
      const int d = static_cast<int>(eq.variables.size());
      RunConfig c = bench_config(TaskKind::Feynman, {d, 5, 5, 5, 5, 1}, {0, 0, 1, 1, 1.5});
      c.task.feynman_id = eq.id;
      tasks.push_back({eq.id, std::move(c)});
    }
  } else if (o.suite == "dynamics") {
    RunConfig ik = bench_config(TaskKind::Ikeda, {2, 4, 4, 4, 2}, {0, 0, 1, 2});
    ik.task.n_train = 2000;
    RunConfig eco = bench_config(TaskKind::Ecosystem, {3, 3, 3, 3}, {2, 1, 0.5});
    eco.task.n_train = 2000;
    tasks.push_back({"ikeda", std::move(ik)});
    tasks.push_back({"ecosystem", std::move(eco)});
  } else if (o.suite == "continual") {
    RunConfig c = bench_config(TaskKind::FivePeaks, {1, 5, 5, 1}, {1, 1, 2000});
    c.grid_schedule = {20};
    c.steps_per_stage = 10;
    c.update_grid = false;
    c.model.grid_lo = 0.0;
    tasks.push_back({"five_peaks", std::move(c), true});
  } else if (o.suite == "tabular") {
    if (o.target.empty() && !o.data.empty()) throw ConfigError("--target", "required for the tabular suite");
    for (const auto& path : o.data) {
      if (!fs::exists(path)) {
        err << "warning: skipping missing dataset " << path << '\n';
        ++skipped;
        continue;
      }
      const Dataset probe = load_csv(path, o.target);
      const int d = static_cast<int>(probe.x.cols());
      RunConfig c = bench_config(TaskKind::Csv, {d, 4, 1}, {5, 2});
      c.task.csv_path = path;
      c.task.target = o.target;
      // Resolve the feature list now so the shape check has a width to compare.
      std::ifstream in(path);
      std::string header;
      std::getline(in, header);
      std::stringstream hs(header);
      for (std::string cell; std::getline(hs, cell, ',');)
        if (cell != o.target) c.task.features.push_back(cell);
      tasks.push_back({fs::path(path).stem().string(), std::move(c)});
    }
    if (o.data.empty()) err << "warning: the tabular suite needs --data files\n";
  } else {
    throw ConfigError("--suite", "expected regression, feynman, dynamics, continual or tabular");
  }
  for (auto& t : tasks) {
    if (o.steps) t.multi.steps_per_stage = *o.steps;
    if (o.n_train) t.multi.task.n_train = *o.n_train;
    if (o.n_test) t.multi.task.n_test = *o.n_test;
    if (!o.grid_schedule.empty() && !t.continual) t.multi.grid_schedule = o.grid_schedule;
  }
  return tasks;
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

int cmd_bench(const CommonFlags& flags, const BenchOptions& o, std::ostream& out, std::ostream& err) {
  int skipped = 0;
  const auto tasks = bench_tasks(o, err, skipped);
  if (tasks.empty()) {
    err << "error: every task in the suite was skipped\n";
    return 1;
  }
  const fs::path dir = flags.out.empty() ? fs::path("bench_" + o.suite) : fs::path(flags.out);
  ensure_dir(dir);

  auto cmp = open_out(dir / "comparison.csv");
  cmp << "task,model,seed,exit,rmse,r2,best_exit\n";
  auto summary = open_out(dir / "summary.csv");
  summary << "task,single_rmse,multi_final_rmse,multi_best_rmse,best_exit,multi_wins,n_seeds\n";
  std::ostringstream text;
  text << std::left << std::setw(12) << "task" << std::setw(14) << "single" << std::setw(14) << "multi(best)"
       << std::setw(10) << "best_exit" << "wins\n";

  for (const auto& task : tasks) {
    std::vector<double> single_rmse, multi_final, multi_best;
    std::map<int, int> best_counts;
    int wins = 0;
    for (const std::uint64_t seed : o.seeds) {
      RunConfig multi = task.multi;
      multi.seed = seed;
      RunConfig single = multi;
      single.model.multi_exit = false;
      single.exit_weights.clear();

      auto eval_of = [&](const RunConfig& c) {
        return task.continual ? run_continual(c).result.per_phase.back() : run_training(c).test;
      };
      const EvalReport rs = eval_of(single);
      const EvalReport rm = eval_of(multi);
      for (const auto& [label, r] : {std::pair{"single", &rs}, std::pair{"multi", &rm}})
        for (std::size_t k = 0; k < r->rmse.size(); ++k) {
          cmp << task.name << ',' << label << ',' << seed << ',' << k << ',' << r->rmse[k] << ',';
          if (r->r2_defined) cmp << r->r2[k];
          cmp << ',' << r->best_exit << '\n';
        }
      single_rmse.push_back(rs.rmse.back());
      multi_final.push_back(rm.rmse.back());
      multi_best.push_back(rm.rmse[static_cast<std::size_t>(rm.best_exit)]);
      ++best_counts[rm.best_exit];
      wins += rm.rmse[static_cast<std::size_t>(rm.best_exit)] < rs.rmse.back() ? 1 : 0;
    }
    int best_exit = 0;
    int best_count = -1;
    for (const auto& [k, n] : best_counts)
      if (n > best_count) best_exit = k, best_count = n;
    const double s = median(single_rmse);
    const double mb = median(multi_best);
    summary << task.name << ',' << s << ',' << median(multi_final) << ',' << mb << ',' << best_exit << ',' << wins
            << ',' << o.seeds.size() << '\n';
    text << std::setw(12) << task.name << std::setw(14) << std::setprecision(4) << s << std::setw(14) << mb
         << std::setw(10) << best_exit << wins << '/' << o.seeds.size() << '\n';
  }
  open_out(dir / "summary.txt") << text.str();
  out << text.str();
  if (skipped > 0) err << "warning: " << skipped << " task(s) skipped\n";
  return 0;
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  for (double v : parse_doubles(text, "--seeds")) {
    if (v < 0 || v != std::floor(v)) throw ConfigError("--seeds", "seeds must be nonnegative integers");
    seeds.push_back(static_cast<std::uint64_t>(v));
  }
  if (seeds.empty()) throw ConfigError("--seeds", "needs at least one seed");
  return seeds;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-exit Kolmogorov-Arnold networks", "mekan"};
  app.require_subcommand(1);
  app.fallthrough();

  CommonFlags flags;
  app.add_option("--config", flags.config, "Run config (JSON)");
  app.add_option("--seed", flags.seed, "Override the config seed");
  app.add_option("--out", flags.out, "Output directory");
  app.add_option("--threads", flags.threads, "Worker threads (falls back to MEKAN_THREADS)");

  auto* train = app.add_subcommand("train", "Train a model and evaluate it on the task's test split");

  std::string model_path, data_path;
  auto* eval = app.add_subcommand("eval", "Evaluate a saved model");
  eval->add_option("--model", model_path, "Model file")->required();
  eval->add_option("--data", data_path, "Dataset CSV (features then targets); defaults to the config's test split");

  ForecastOptions fo;
  auto* forecast = app.add_subcommand("forecast", "Closed-loop rollout against the true dynamics");
  forecast->add_option("--model", fo.model, "Model file")->required();
  forecast->add_option("--task", fo.task, "ikeda or ecosystem")->capture_default_str();
  forecast->add_option("--steps", fo.steps, "Rollout length")->capture_default_str();
  forecast->add_option("--threshold", fo.threshold, "Max-abs error that counts as divergence")->capture_default_str();
  forecast->add_option("--x0", fo.x0, "Initial state, comma separated");
  forecast->add_option("--exit", fo.exit, "Head used for the rollout (default: best one-step exit)");

  auto* continual = app.add_subcommand("continual", "Train on five-peak phases in sequence");

  BenchOptions bo;
  std::string seeds = "0";
  std::string schedule;
  auto* bench = app.add_subcommand("bench", "Compare matched single- and multi-exit runs");
  bench->add_option("--suite", bo.suite, "regression, feynman, dynamics, continual or tabular")->required();
  bench->add_option("--seeds", seeds, "Comma-separated seed list")->capture_default_str();
  bench->add_option("--steps", bo.steps, "Override steps per stage");
  bench->add_option("--n-train", bo.n_train, "Override training set size");
  bench->add_option("--n-test", bo.n_test, "Override test set size");
  bench->add_option("--grid-schedule", schedule, "Override the grid schedule, comma separated");
  bench->add_option("--data", bo.data, "Tabular dataset CSV (repeatable)");
  bench->add_option("--target", bo.target, "Target column for tabular datasets");

  int samples = 101;
  auto* exporter = app.add_subcommand("export-activations", "Write every activation as an (x, phi_x) CSV");
  exporter->add_option("--model", model_path, "Model file")->required();
  exporter->add_option("--samples", samples, "Points per activation")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    set_num_threads(resolve_thread_count(flags.threads));
    if (train->parsed()) return cmd_train(flags, out);
    if (eval->parsed()) return cmd_eval(flags, model_path, data_path, out);
    if (forecast->parsed()) return cmd_forecast(flags, fo, out);
    if (continual->parsed()) return cmd_continual(flags, out);
    if (exporter->parsed()) return cmd_export(flags, model_path, samples, out);
    if (bench->parsed()) {
      bo.seeds = parse_seeds(seeds);
      if (flags.seed) bo.seeds = {*flags.seed};
      if (!schedule.empty())
        for (double g : parse_doubles(schedule, "--grid-schedule")) bo.grid_schedule.push_back(static_cast<int>(g));
      return cmd_bench(flags, bo, out, err);
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const TrainingError& e) {
    err << "training aborted: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace mekan
