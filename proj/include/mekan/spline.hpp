#pragma once

#include "mekan/types.hpp"

#include <array>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace mekan {

inline constexpr int kMaxSplineOrder = 7;

enum class BaseKind { SiLU, Identity, Zero };

std::string_view to_string(BaseKind kind);
BaseKind parse_base_kind(std::string_view name);

double silu(double x);
double base_value(BaseKind kind, double x);
double base_slope(BaseKind kind, double x);

/// Uniform knot vector over [lo, hi] with `order` extra knots repeated at the
/// same spacing beyond each end. Basis count is num_intervals + order.
class SplineGrid {
 public:
  SplineGrid(int num_intervals, int order, double lo, double hi);

  int num_intervals() const noexcept { return num_intervals_; }
  int order() const noexcept { return order_; }
  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }
  double spacing() const noexcept { return spacing_; }
  int basis_count() const noexcept { return num_intervals_ + order_; }
  std::span<const double> knots() const noexcept { return knots_; }

  bool contains(double x) const noexcept { return x >= lo_ && x <= hi_; }
  double clamp(double x) const noexcept;
  /// Knot index s with knots[s] <= x < knots[s+1] for an in-domain x; the
  /// right endpoint belongs to the last interval.
  int span_index(double x) const noexcept;

  friend bool operator==(const SplineGrid&, const SplineGrid&) = default;

 private:
  int num_intervals_;
  int order_;
  double lo_;
  double hi_;
  double spacing_;
  std::vector<double> knots_;
};

/// The (order + 1) possibly-nonzero basis values at one point, starting at
/// basis index `first`. `slope` holds d/dx of each value and is zero when the
/// input was clamped into the domain.
struct LocalBasis {
  int first = 0;
  int count = 0;
  bool clamped = false;
  std::array<double, kMaxSplineOrder + 1> value{};
  std::array<double, kMaxSplineOrder + 1> slope{};
};

void eval_local_basis(const SplineGrid& grid, double x, LocalBasis& out, bool with_slope = false);

/// All basis values at x (length basis_count()).
std::vector<double> eval_basis(const SplineGrid& grid, double x);

/// phi(x) = b(x) + sum_j c_j B_j(x).
struct SplineActivation {
  SplineGrid grid;
  std::vector<double> coeffs;
  BaseKind base_kind = BaseKind::SiLU;

  SplineActivation(SplineGrid g, std::vector<double> c, BaseKind kind);

  static SplineActivation zeros(const SplineGrid& grid, BaseKind kind);
  static SplineActivation random(const SplineGrid& grid, BaseKind kind, double sigma, std::mt19937_64& rng);
};

double eval_spline_part(const SplineActivation& act, double x);
double eval_activation(const SplineActivation& act, double x);

struct ActivationEval {
  double value = 0.0;
  double slope = 0.0;
};
ActivationEval eval_activation_with_slope(const SplineActivation& act, double x);

struct RefitResult {
  SplineActivation activation;
  /// RMS of (old spline part - new spline part) over the samples.
  double residual_rms = 0.0;
  /// The least-squares system was rank deficient; the minimum-norm solution was used.
  bool rank_deficient = false;
};

/// Least-squares transfer of the spline part onto `target` using `samples`.
RefitResult refit_to_grid(const SplineActivation& act, const SplineGrid& target, std::span<const double> samples);

/// Same domain and order, `new_num_intervals` intervals.
RefitResult refine_grid(const SplineActivation& act, int new_num_intervals, std::span<const double> samples);

inline constexpr double kGridRangeMargin = 0.05;
inline constexpr double kMinGridWidth = 1.0;

/// Expand the grid domain so it covers the samples plus a relative margin.
/// A no-op (same activation, zero residual) when the samples already lie in
/// the domain.
RefitResult update_grid_range(const SplineActivation& act, std::span<const double> samples,
                              double margin = kGridRangeMargin);

}  // namespace mekan
