#pragma once

#include "mekan/types.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mekan {

enum class Split { Train, Test };

struct Dataset {
  Matrix x;
  Matrix y;
  std::string name;
  Split split = Split::Train;

  Eigen::Index size() const { return x.rows(); }
  void validate() const;
};

using DatasetPair = std::pair<Dataset, Dataset>;

// ---- Regression targets -----------------------------------------------------

double sinc(double x);
double sines_2d(double x1, double x2);

struct VariableRange {
  std::string name;
  double lo = 0.1;
  double hi = 1.0;
};

/// One dimensionless Feynman benchmark formula.
struct FeynmanEquation {
  std::string id;
  std::string formula;
  std::vector<VariableRange> variables;
  std::function<double(std::span<const double>)> eval;
};

const std::vector<FeynmanEquation>& feynman_equations();
/// Throws DataError listing the supported ids when `id` is unknown.
const FeynmanEquation& feynman_equation(std::string_view id);

enum class RegressionTarget { Sinc1D, Sines2D, Feynman };

struct RegressionSpec {
  RegressionTarget target = RegressionTarget::Sinc1D;
  std::string feynman_id;
  /// Overrides the default hypercube (one entry per input, or one entry for all inputs).
  std::vector<std::pair<double, double>> ranges;
};

inline constexpr std::pair<double, double> kSincDomain{-2.0, 2.0};
inline constexpr std::pair<double, double> kSines2dDomain{0.0, 1.0};

DatasetPair gen_regression(const RegressionSpec& spec, int n_train, int n_test, std::uint64_t seed);

// ---- Ikeda map -------------------------------------------------------------

struct IkedaParams {
  double mu = 0.9;
};

using State2 = std::array<double, 2>;
State2 ikeda_step(const State2& state, const IkedaParams& params = {});

/// Rows are states x_1 .. x_n obtained by iterating from x0 (x0 itself excluded).
Matrix ikeda_trajectory(const State2& x0, int n_steps, const IkedaParams& params = {});

struct IkedaDataOptions {
  int n_train = 2000;
  int n_test = 1000;
  int transient = 1000;
  std::uint64_t seed = 0;
  IkedaParams params;
  /// Starting state before the transient; drawn from U([-0.5, 0.5]^2) when unset.
  std::optional<State2> initial;
};

/// Consecutive (x_n, x_{n+1}) pairs along one orbit; test pairs follow the
/// training segment.
DatasetPair ikeda_dataset(const IkedaDataOptions& options);

// ---- Three-species ecosystem --------------------------------------------------

struct EcosystemParams {
  double K = 0.98;
  double xp = 0.4;
  double yp = 2.009;
  double xq = 0.08;
  double yq = 2.876;
  double N0 = 0.16129;
  double P0 = 0.5;
};

using State3 = std::array<double, 3>;
State3 ecosystem_rhs(const State3& state, const EcosystemParams& params = {});

using VectorField = std::function<Vector(const Vector&)>;
/// Classical fourth-order Runge-Kutta; row 0 is x0, row k is x(k dt).
Matrix integrate_rk4(const VectorField& rhs, const Vector& x0, double dt, int n_steps);

/// Flow map of the ecosystem over one sample interval, using RK4 substeps.
Vector ecosystem_flow(const Vector& state, double dt_sample, double dt, const EcosystemParams& params = {});

struct EcosystemDataOptions {
  double dt = 0.01;
  double dt_sample = 0.1;
  int n_train = 2000;
  int n_test = 1000;
  /// Sample intervals discarded before recording.
  int transient = 1000;
  std::uint64_t seed = 0;
  EcosystemParams params;
  std::optional<State3> initial;
};

DatasetPair ecosystem_dataset(const EcosystemDataOptions& options);

// ---- Continual learning --------------------------------------------------------

using PeakCenters = std::array<double, 5>;
inline constexpr PeakCenters kDefaultPeakCenters{0.1, 0.3, 0.5, 0.7, 0.9};

double five_peaks(double x, const PeakCenters& centers = kDefaultPeakCenters);

/// Phase i holds n_per_peak equally spaced points in [c_i - h, c_i + h], h
/// half the spacing between centers.
std::vector<Dataset> gen_five_peaks(int n_per_peak, const PeakCenters& centers = kDefaultPeakCenters);

/// Uniform points over the union of the phase windows.
Dataset five_peaks_full_domain(int n_points, const PeakCenters& centers = kDefaultPeakCenters);

// ---- CSV ----------------------------------------------------------------

/// Reads one header row of column names followed by numeric rows. Empty
/// `feature_columns` selects every column except the target.
Dataset load_csv(const std::filesystem::path& path, const std::string& target_column,
                 const std::vector<std::string>& feature_columns = {});

/// Random disjoint train/test subsets drawn without replacement.
DatasetPair split(const Dataset& data, int n_train, int n_test, std::uint64_t seed);

/// Features then targets, with a header row.
void write_csv(const Dataset& data, const std::filesystem::path& path, const std::vector<std::string>& feature_names = {},
               const std::vector<std::string>& target_names = {});

}  // namespace mekan
