#include "mekan/lbfgs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace mekan {

void LbfgsConfig::validate() const {
  if (history_size < 1) throw ConfigError("train.lbfgs.history_size", "must be positive");
  if (max_iters < 0) throw ConfigError("train.lbfgs.max_iters", "must be nonnegative");
  if (!(learning_rate > 0.0)) throw ConfigError("train.lbfgs.learning_rate", "must be positive");
  if (tol_grad < 0.0 || tol_param < 0.0 || tol_curvature < 0.0) throw ConfigError("train.lbfgs.tolerances", "must be nonnegative");
  if (!(wolfe_c1 > 0.0 && wolfe_c1 < wolfe_c2 && wolfe_c2 < 1.0))
    throw ConfigError("train.lbfgs.wolfe", "need 0 < c1 < c2 < 1");
  if (max_line_search_evals < 1) throw ConfigError("train.lbfgs.max_line_search_evals", "must be positive");
}

std::string_view to_string(StopReason reason) {
  switch (reason) {
    case StopReason::MaxIterations: return "max_iterations";
    case StopReason::GradientTolerance: return "gradient_tolerance";
    case StopReason::ParameterTolerance: return "parameter_tolerance";
    case StopReason::LossTolerance: return "loss_tolerance";
    case StopReason::LineSearchFailure: return "line_search_failure";
  }
  return "unknown";
}

void write_trace_csv(std::ostream& os, const OptTrace& trace) {
  os << "iter,loss,grad_norm,step_size\n";
  os.precision(17);
  for (const auto& r : trace.records) os << r.iter << ',' << r.loss << ',' << r.grad_norm << ',' << r.step_size << '\n';
}

namespace {

double cubic_minimizer(double x1, double f1, double g1, double x2, double f2, double g2, double lo, double hi) {
  const double d1 = g1 + g2 - 3.0 * (f1 - f2) / (x1 - x2);
  const double d2_sq = d1 * d1 - g1 * g2;
  if (!std::isfinite(d1) || !std::isfinite(d2_sq) || d2_sq < 0.0) return 0.5 * (lo + hi);
  const double d2 = std::sqrt(d2_sq);
  double pos = 0.0;
  if (x1 <= x2)
    pos = x2 - (x2 - x1) * ((g2 + d2 - d1) / (g2 - g1 + 2.0 * d2));
  else
    pos = x1 - (x1 - x2) * ((g1 + d2 - d1) / (g1 - g2 + 2.0 * d2));
  if (!std::isfinite(pos)) return 0.5 * (lo + hi);
  return std::clamp(pos, lo, hi);
}

struct Point {
  double t = 0.0;
  double f = 0.0;
  double g = 0.0;
};

}  // namespace

LineSearchResult line_search_strong_wolfe(const LineFunction& phi, LineSample at_zero, double initial_step, double c1,
                                          double c2, int max_evals) {
  if (!(at_zero.slope < 0.0)) throw std::invalid_argument("line search needs a descent direction (phi'(0) < 0)");
  if (!(initial_step > 0.0)) throw std::invalid_argument("line search needs a positive initial step");

  const double f0 = at_zero.value;
  const double g0 = at_zero.slope;
  LineSearchResult out;
  out.best_value = f0;

  auto sample = [&](double t) {
    LineSample s = phi(t);
    ++out.evals;
    if (!std::isfinite(s.value)) {
      s.value = std::numeric_limits<double>::infinity();
      s.slope = std::numeric_limits<double>::quiet_NaN();
    }
    if (s.value < out.best_value) {
      out.best_value = s.value;
      out.best_step = t;
    }
    return Point{t, s.value, s.slope};
  };
  auto armijo = [&](const Point& p) { return p.f <= f0 + c1 * p.t * g0; };
  auto curvature = [&](const Point& p) { return std::abs(p.g) <= -c2 * g0; };
  auto accept = [&](const Point& p) {
    out.ok = true;
    out.step = p.t;
    out.at_step = {p.f, p.g};
    return out;
  };

  Point prev{0.0, f0, g0};
  Point cur = sample(initial_step);
  Point lo;
  Point hi;
  bool bracketed = false;

  // Bracketing: grow the step until the interval [prev, cur] holds a Wolfe point.
  for (int it = 0;; ++it) {
    if (!armijo(cur) || (it > 0 && cur.f >= prev.f)) {
      lo = prev;
      hi = cur;
      bracketed = true;
      break;
    }
    if (curvature(cur)) return accept(cur);
    if (cur.g >= 0.0) {
      lo = cur;
      hi = prev;
      bracketed = true;
      break;
    }
    if (out.evals >= max_evals) break;
    const double min_step = cur.t + 0.01 * (cur.t - prev.t);
    const double max_step = cur.t * 10.0;
    const double next = cubic_minimizer(prev.t, prev.f, prev.g, cur.t, cur.f, cur.g, min_step, max_step);
    prev = cur;
    cur = sample(next);
  }
  if (!bracketed) return out;

  // Zoom: lo always satisfies sufficient decrease with the lowest value so far.
  bool insufficient_progress = false;
  while (out.evals < max_evals) {
    const double a = std::min(lo.t, hi.t);
    const double b = std::max(lo.t, hi.t);
    if (b - a <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, b)) break;
    double t = std::isfinite(hi.f) ? cubic_minimizer(lo.t, lo.f, lo.g, hi.t, hi.f, hi.g, a, b) : 0.5 * (a + b);
    const double eps = 0.1 * (b - a);
    if (std::min(b - t, t - a) < eps) {
      if (insufficient_progress || t >= b || t <= a) {
        t = std::abs(t - b) < std::abs(t - a) ? b - eps : a + eps;
        insufficient_progress = false;
      } else {
        insufficient_progress = true;
      }
    } else {
      insufficient_progress = false;
    }
    const Point p = sample(t);
    if (!armijo(p) || p.f >= lo.f) {
      hi = p;
    } else {
      if (curvature(p)) return accept(p);
      if (p.g * (hi.t - lo.t) >= 0.0) hi = lo;
      lo = p;
    }
  }
  return out;
}

Vector lbfgs_direction(const LbfgsHistory& history, const Vector& grad) {
  const std::size_t m = history.s.size();
  Vector q = -grad;
  if (m == 0) return q;
  std::vector<double> alpha(m);
  std::vector<double> rho(m);
  for (std::size_t k = m; k-- > 0;) {
    rho[k] = 1.0 / history.y[k].dot(history.s[k]);
    alpha[k] = rho[k] * history.s[k].dot(q);
    q -= alpha[k] * history.y[k];
  }
  const double gamma = history.s.back().dot(history.y.back()) / history.y.back().squaredNorm();
  q *= gamma;
  for (std::size_t k = 0; k < m; ++k) {
    const double beta = rho[k] * history.y[k].dot(q);
    q += (alpha[k] - beta) * history.s[k];
  }
  return q;
}

MinimizeResult minimize(const Objective& objective, Vector x0, const LbfgsConfig& config,
                        const IterationCallback& on_iteration) {
  config.validate();
  MinimizeResult result;
  OptTrace& trace = result.trace;

  Vector x = std::move(x0);
  Vector g(x.size());
  double f = objective(x, g);
  ++trace.total_evals;
  if (!std::isfinite(f) || !g.allFinite()) throw Error("objective is not finite at the starting point");

  Vector best_x = x;
  double best_f = f;
  LbfgsHistory history;

  // Evaluations made during one line search; the accepted step's gradient is reused.
  struct Eval {
    double t;
    double f;
    Vector g;
  };
  std::vector<Eval> evals;

  auto run_line_search = [&](const Vector& d, double gtd, double t0) {
    evals.clear();
    LineFunction phi = [&](double t) {
      Vector gt(x.size());
      double ft = 0.0;
      try {
        const Vector xt = x + t * d;
        ft = objective(xt, gt);
      } catch (const NonFiniteLossError&) {
        ft = std::numeric_limits<double>::infinity();
        gt.setConstant(std::numeric_limits<double>::quiet_NaN());
      }
      ++trace.total_evals;
      if (std::isfinite(ft) && ft < best_f) {
        best_f = ft;
        best_x = x + t * d;
      }
      evals.push_back({t, ft, gt});
      return LineSample{ft, gt.dot(d)};
    };
    return line_search_strong_wolfe(phi, {f, gtd}, t0, config.wolfe_c1, config.wolfe_c2, config.max_line_search_evals);
  };

  auto first_step = [&]() { return std::min(1.0, 1.0 / g.lpNorm<1>()) * config.learning_rate; };

  if (g.lpNorm<Eigen::Infinity>() <= config.tol_grad) {
    trace.stop_reason = StopReason::GradientTolerance;
    result.x = best_x;
    result.loss = best_f;
    return result;
  }

  for (int iter = 1; iter <= config.max_iters; ++iter) {
    Vector d = lbfgs_direction(history, g);
    double gtd = g.dot(d);
    if (!(gtd < 0.0)) {
      history = {};
      d = -g;
      gtd = g.dot(d);
    }
    if (gtd > -config.tol_param) {
      trace.stop_reason = StopReason::LossTolerance;
      break;
    }
    double t0 = history.s.empty() ? first_step() : config.learning_rate;
    LineSearchResult ls = run_line_search(d, gtd, t0);
    if (!ls.ok) {
      // One steepest-descent retry with fresh curvature information.
      history = {};
      d = -g;
      gtd = g.dot(d);
      ls = run_line_search(d, gtd, first_step());
      if (!ls.ok) {
        trace.line_search_failed = true;
        trace.stop_reason = StopReason::LineSearchFailure;
        break;
      }
    }

    const auto it = std::find_if(evals.rbegin(), evals.rend(), [&](const Eval& e) { return e.t == ls.step; });
    const Vector s = ls.step * d;
    const Vector x_new = x + s;
    const Vector& g_new = it->g;
    const double f_new = it->f;
    const Vector yv = g_new - g;
    const double sy = s.dot(yv);
    if (sy > config.tol_curvature * s.norm() * yv.norm() && sy > 0.0) {
      if (static_cast<int>(history.s.size()) == config.history_size) {
        history.s.pop_front();
        history.y.pop_front();
      }
      history.s.push_back(s);
      history.y.push_back(yv);
      ++trace.curvature_updates;
    }

    const double f_prev = f;
    x = x_new;
    g = g_new;
    f = f_new;

    IterationRecord rec{iter, f, g.norm(), ls.step, ls.evals};
    trace.records.push_back(rec);
    if (on_iteration) on_iteration(x, rec);

    if (g.lpNorm<Eigen::Infinity>() <= config.tol_grad) {
      trace.stop_reason = StopReason::GradientTolerance;
      break;
    }
    if (s.lpNorm<Eigen::Infinity>() <= config.tol_param) {
      trace.stop_reason = StopReason::ParameterTolerance;
      break;
    }
    if (std::abs(f - f_prev) < config.tol_param) {
      trace.stop_reason = StopReason::LossTolerance;
      break;
    }
  }

  if (f <= best_f) {
    best_f = f;
    best_x = x;
  }
  result.x = std::move(best_x);
  result.loss = best_f;
  return result;
}

}  // namespace mekan
