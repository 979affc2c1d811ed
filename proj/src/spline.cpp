#include "mekan/spline.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mekan {

std::string_view to_string(BaseKind kind) {
  switch (kind) {
    case BaseKind::SiLU: return "silu";
    case BaseKind::Identity: return "identity";
    case BaseKind::Zero: return "zero";
  }
  return "silu";
}

BaseKind parse_base_kind(std::string_view name) {
  if (name == "silu") return BaseKind::SiLU;
  if (name == "identity") return BaseKind::Identity;
  if (name == "zero") return BaseKind::Zero;
  throw ConfigError("", "unknown base kind '" + std::string(name) + "' (expected silu, identity or zero)");
}

double silu(double x) { return x / (1.0 + std::exp(-x)); }

double base_value(BaseKind kind, double x) {
  switch (kind) {
    case BaseKind::SiLU: return silu(x);
    case BaseKind::Identity: return x;
    case BaseKind::Zero: return 0.0;
  }
  return 0.0;
}

double base_slope(BaseKind kind, double x) {
  switch (kind) {
    case BaseKind::SiLU: {
      const double s = 1.0 / (1.0 + std::exp(-x));
      return s * (1.0 + x * (1.0 - s));
    }
    case BaseKind::Identity: return 1.0;
    case BaseKind::Zero: return 0.0;
  }
  return 0.0;
}

SplineGrid::SplineGrid(int num_intervals, int order, double lo, double hi)
    : num_intervals_(num_intervals), order_(order), lo_(lo), hi_(hi) {
  if (num_intervals < 1) throw ShapeError("spline grid needs at least one interval");
  if (order < 0 || order > kMaxSplineOrder)
    throw ShapeError("spline order must lie in [0, " + std::to_string(kMaxSplineOrder) + "]");
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi))
    throw ShapeError("spline grid domain must satisfy lo < hi");
  spacing_ = (hi - lo) / num_intervals;
  knots_.resize(static_cast<std::size_t>(num_intervals + 2 * order + 1));
  for (int m = 0; m < static_cast<int>(knots_.size()); ++m)
    knots_[m] = lo + (hi - lo) * static_cast<double>(m - order) / num_intervals;
}

double SplineGrid::clamp(double x) const noexcept { return std::clamp(x, lo_, hi_); }

int SplineGrid::span_index(double x) const noexcept {
  const int first = order_;
  const int last = order_ + num_intervals_ - 1;
  int s = first + static_cast<int>(std::floor((x - lo_) / spacing_));
  s = std::clamp(s, first, last);
  while (s > first && x < knots_[s]) --s;
  while (s < last && x >= knots_[s + 1]) ++s;
  return s;
}

void eval_local_basis(const SplineGrid& grid, double x, LocalBasis& out, bool with_slope) {
  const int p = grid.order();
  const auto knots = grid.knots();
  const double xc = std::isnan(x) ? grid.lo() : grid.clamp(x);
  const int s = grid.span_index(xc);

  out.first = s - p;
  out.count = p + 1;
  out.clamped = !(xc == x);

  // Triangular Cox-de Boor evaluation of the p+1 nonzero basis values.
  std::array<double, kMaxSplineOrder + 1> left{};
  std::array<double, kMaxSplineOrder + 1> right{};
  auto& n = out.value;
  std::array<double, kMaxSplineOrder + 1> lower{};
  n[0] = 1.0;
  for (int j = 1; j <= p; ++j) {
    if (j == p) lower = n;
    left[j] = xc - knots[s + 1 - j];
    right[j] = knots[s + j] - xc;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double temp = n[r] / (right[r + 1] + left[j - r]);
      n[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    n[j] = saved;
  }

  if (!with_slope) return;
  out.slope.fill(0.0);
  if (p == 0 || out.clamped) return;
  // d/dx B_{i,p} = p (B_{i,p-1} / (t_{i+p} - t_i) - B_{i+1,p-1} / (t_{i+p+1} - t_{i+1}))
  for (int r = 0; r <= p; ++r) {
    const int i = s - p + r;
    double d = 0.0;
    if (r >= 1) d += lower[r - 1] / (knots[i + p] - knots[i]);
    if (r <= p - 1) d -= lower[r] / (knots[i + p + 1] - knots[i + 1]);
    out.slope[r] = p * d;
  }
}

std::vector<double> eval_basis(const SplineGrid& grid, double x) {
  std::vector<double> all(static_cast<std::size_t>(grid.basis_count()), 0.0);
  LocalBasis local;
  eval_local_basis(grid, x, local);
  for (int r = 0; r < local.count; ++r) all[local.first + r] = local.value[r];
  return all;
}

SplineActivation::SplineActivation(SplineGrid g, std::vector<double> c, BaseKind kind)
    : grid(std::move(g)), coeffs(std::move(c)), base_kind(kind) {
  if (static_cast<int>(coeffs.size()) != grid.basis_count())
    throw ShapeError("coefficient count " + std::to_string(coeffs.size()) + " does not match basis count " +
                     std::to_string(grid.basis_count()));
}

SplineActivation SplineActivation::zeros(const SplineGrid& grid, BaseKind kind) {
  return {grid, std::vector<double>(static_cast<std::size_t>(grid.basis_count()), 0.0), kind};
}

SplineActivation SplineActivation::random(const SplineGrid& grid, BaseKind kind, double sigma,
                                          std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, sigma);
  std::vector<double> c(static_cast<std::size_t>(grid.basis_count()));
  for (auto& v : c) v = sigma > 0.0 ? normal(rng) : 0.0;
  return {grid, std::move(c), kind};
}

double eval_spline_part(const SplineActivation& act, double x) {
  LocalBasis local;
  eval_local_basis(act.grid, x, local);
  double sum = 0.0;
  for (int r = 0; r < local.count; ++r) sum += act.coeffs[local.first + r] * local.value[r];
  return sum;
}

double eval_activation(const SplineActivation& act, double x) {
  return base_value(act.base_kind, x) + eval_spline_part(act, x);
}

ActivationEval eval_activation_with_slope(const SplineActivation& act, double x) {
  LocalBasis local;
  eval_local_basis(act.grid, x, local, true);
  ActivationEval out{base_value(act.base_kind, x), base_slope(act.base_kind, x)};
  for (int r = 0; r < local.count; ++r) {
    const double c = act.coeffs[local.first + r];
    out.value += c * local.value[r];
    out.slope += c * local.slope[r];
  }
  return out;
}

RefitResult refit_to_grid(const SplineActivation& act, const SplineGrid& target, std::span<const double> samples) {
  if (samples.empty()) throw DataError("grid refit needs at least one sample");
  const auto n = static_cast<Eigen::Index>(samples.size());
  const int nb = target.basis_count();

  Eigen::MatrixXd design = Eigen::MatrixXd::Zero(n, nb);
  Eigen::VectorXd rhs(n);
  LocalBasis local;
  for (Eigen::Index s = 0; s < n; ++s) {
    const double x = samples[static_cast<std::size_t>(s)];
    if (!std::isfinite(x)) throw DataError("non-finite sample in grid refit");
    eval_local_basis(target, x, local);
    for (int r = 0; r < local.count; ++r) design(s, local.first + r) = local.value[r];
    rhs(s) = eval_spline_part(act, x);
  }

  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(design);
  const Eigen::VectorXd c = cod.solve(rhs);
  const double rms = std::sqrt((design * c - rhs).squaredNorm() / static_cast<double>(n));

  RefitResult out{SplineActivation(target, std::vector<double>(c.data(), c.data() + c.size()), act.base_kind), rms,
                  cod.rank() < nb};
  return out;
}

RefitResult refine_grid(const SplineActivation& act, int new_num_intervals, std::span<const double> samples) {
  if (new_num_intervals < act.grid.num_intervals())
    throw ShapeError("grid refinement cannot reduce the number of intervals");
  const SplineGrid target(new_num_intervals, act.grid.order(), act.grid.lo(), act.grid.hi());
  return refit_to_grid(act, target, samples);
}

RefitResult update_grid_range(const SplineActivation& act, std::span<const double> samples, double margin) {
  if (samples.empty()) throw DataError("grid range update needs at least one sample");
  const auto [min_it, max_it] = std::minmax_element(samples.begin(), samples.end());
  const double smin = *min_it;
  const double smax = *max_it;
  if (!std::isfinite(smin) || !std::isfinite(smax)) throw DataError("non-finite sample in grid range update");
  if (act.grid.contains(smin) && act.grid.contains(smax)) return {act, 0.0, false};

  double lo = act.grid.lo();
  double hi = act.grid.hi();
  const double width = smax - smin;
  if (width <= 1e-12 * std::max(1.0, std::abs(smin))) {
    lo = std::min(lo, smin - 0.5 * kMinGridWidth);
    hi = std::max(hi, smax + 0.5 * kMinGridWidth);
  } else {
    lo = std::min(lo, smin - margin * width);
    hi = std::max(hi, smax + margin * width);
  }
  const SplineGrid target(act.grid.num_intervals(), act.grid.order(), lo, hi);
  return refit_to_grid(act, target, samples);
}

}  // namespace mekan
