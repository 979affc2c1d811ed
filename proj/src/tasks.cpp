#include "mekan/tasks.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

namespace mekan {

void Dataset::validate() const {
  if (x.rows() != y.rows()) throw DataError(name + ": feature and target row counts differ");
  if (!x.allFinite() || !y.allFinite()) throw DataError(name + ": non-finite values");
}

double sinc(double x) {
  const double px = std::numbers::pi * x;
  if (std::abs(px) < 1e-8) return 1.0 - px * px / 6.0;
  return std::sin(px) / px;
}

double sines_2d(double x1, double x2) {
  return std::sin(2.0 * std::numbers::pi * x1 * x1) * std::sin(4.0 * std::numbers::pi * x2 * x2);
}

namespace {

std::vector<VariableRange> unit_ranges(std::initializer_list<const char*> names) {
  std::vector<VariableRange> out;
  for (const char* n : names) out.push_back({n, 0.1, 1.0});
  return out;
}

std::vector<FeynmanEquation> make_feynman_table() {
  constexpr double pi = std::numbers::pi;
  std::vector<FeynmanEquation> t;
  t.push_back({"I.6.20", "exp(-theta^2/(2 sigma^2)) / sqrt(2 pi sigma^2)",
               {{"theta", 1.0, 3.0}, {"sigma", 1.0, 3.0}},
               [pi](std::span<const double> v) {
                 return std::exp(-v[0] * v[0] / (2.0 * v[1] * v[1])) / std::sqrt(2.0 * pi * v[1] * v[1]);
               }});
  t.push_back({"I.6.20b", "exp(-(theta - theta1)^2/(2 sigma^2)) / sqrt(2 pi sigma^2)",
               {{"theta", 1.0, 3.0}, {"theta1", 1.0, 3.0}, {"sigma", 1.0, 3.0}},
               [pi](std::span<const double> v) {
                 const double d = v[0] - v[1];
                 return std::exp(-d * d / (2.0 * v[2] * v[2])) / std::sqrt(2.0 * pi * v[2] * v[2]);
               }});
  // Ranges follow from coordinates in [1,2] and [3,4] scaled by x1 in [3,4].
  t.push_back({"I.9.18", "a / ((b - 1)^2 + (c - d)^2 + (e - f)^2)",
               {{"a", 0.0625, 0.8889},
                {"b", 0.25, 0.6667},
                {"c", 0.75, 1.3333},
                {"d", 0.25, 0.6667},
                {"e", 0.75, 1.3333},
                {"f", 0.25, 0.6667}},
               [](std::span<const double> v) {
                 const double den = (v[1] - 1.0) * (v[1] - 1.0) + (v[2] - v[3]) * (v[2] - v[3]) +
                                    (v[4] - v[5]) * (v[4] - v[5]);
                 return v[0] / den;
               }});
  t.push_back({"I.12.11", "1 + a sin(theta)", unit_ranges({"a", "theta"}),
               [](std::span<const double> v) { return 1.0 + v[0] * std::sin(v[1]); }});
  t.push_back({"I.13.12", "a (1/b - 1)", unit_ranges({"a", "b"}),
               [](std::span<const double> v) { return v[0] * (1.0 / v[1] - 1.0); }});
  t.push_back({"I.15.3x", "(1 - a) / sqrt(1 - b^2)",
               {{"a", 0.1, 1.0}, {"b", 0.1, 0.9}},
               [](std::span<const double> v) { return (1.0 - v[0]) / std::sqrt(1.0 - v[1] * v[1]); }});
  t.push_back({"I.16.6", "(a + b) / (1 + a b)", unit_ranges({"a", "b"}),
               [](std::span<const double> v) { return (v[0] + v[1]) / (1.0 + v[0] * v[1]); }});
  t.push_back({"I.18.4", "(1 + a b) / (1 + a)", unit_ranges({"a", "b"}),
               [](std::span<const double> v) { return (1.0 + v[0] * v[1]) / (1.0 + v[0]); }});
  t.push_back({"I.26.2", "asin(n sin(theta2))", unit_ranges({"n", "theta2"}),
               [](std::span<const double> v) { return std::asin(v[0] * std::sin(v[1])); }});
  t.push_back({"I.27.6", "1 / (1 + a b)", unit_ranges({"a", "b"}),
               [](std::span<const double> v) { return 1.0 / (1.0 + v[0] * v[1]); }});
  return t;
}

}  // namespace

const std::vector<FeynmanEquation>& feynman_equations() {
  static const std::vector<FeynmanEquation> table = make_feynman_table();
  return table;
}

const FeynmanEquation& feynman_equation(std::string_view id) {
  for (const auto& eq : feynman_equations())
    if (eq.id == id) return eq;
  std::string ids;
  for (const auto& eq : feynman_equations()) ids += (ids.empty() ? "" : ", ") + eq.id;
  throw DataError("unknown Feynman equation '" + std::string(id) + "'; supported: " + ids);
}

DatasetPair gen_regression(const RegressionSpec& spec, int n_train, int n_test, std::uint64_t seed) {
  if (n_train < 1 || n_test < 1) throw DataError("regression datasets need at least one sample per split");
  std::vector<std::pair<double, double>> box;
  std::function<double(std::span<const double>)> target;
  std::string name;
  switch (spec.target) {
    case RegressionTarget::Sinc1D:
      box = {kSincDomain};
      target = [](std::span<const double> v) { return sinc(v[0]); };
      name = "sinc";
      break;
    case RegressionTarget::Sines2D:
      box = {kSines2dDomain, kSines2dDomain};
      target = [](std::span<const double> v) { return sines_2d(v[0], v[1]); };
      name = "sines2d";
      break;
    case RegressionTarget::Feynman: {
      const auto& eq = feynman_equation(spec.feynman_id);
      for (const auto& r : eq.variables) box.emplace_back(r.lo, r.hi);
      target = eq.eval;
      name = "feynman_" + eq.id;
      break;
    }
  }
  if (spec.ranges.size() == 1) {
    std::fill(box.begin(), box.end(), spec.ranges.front());
  } else if (!spec.ranges.empty()) {
    if (spec.ranges.size() != box.size()) throw DataError("range override count does not match the target's inputs");
    box = spec.ranges;
  }
  for (const auto& [lo, hi] : box)
    if (!(lo < hi)) throw DataError("regression ranges need lo < hi");

  std::mt19937_64 rng(seed);
  const int d = static_cast<int>(box.size());
  auto draw = [&](int n, Split split) {
    Dataset ds{Matrix(n, d), Matrix(n, 1), name, split};
    std::vector<double> v(static_cast<std::size_t>(d));
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < d; ++c) {
        std::uniform_real_distribution<double> u(box[c].first, box[c].second);
        v[c] = u(rng);
        ds.x(r, c) = v[c];
      }
      ds.y(r, 0) = target(v);
    }
    ds.validate();
    return ds;
  };
  Dataset train = draw(n_train, Split::Train);
  Dataset test = draw(n_test, Split::Test);
  return {std::move(train), std::move(test)};
}

State2 ikeda_step(const State2& s, const IkedaParams& p) {
  const double x = s[0];
  const double y = s[1];
  const double phi = 0.4 - 6.0 / (1.0 + x * x + y * y);
  const double c = std::cos(phi);
  const double sn = std::sin(phi);
  return {1.0 + p.mu * (x * c - y * sn), p.mu * (x * sn + y * c)};
}

Matrix ikeda_trajectory(const State2& x0, int n_steps, const IkedaParams& params) {
  Matrix out(std::max(n_steps, 0), 2);
  State2 s = x0;
  for (int k = 0; k < n_steps; ++k) {
    s = ikeda_step(s, params);
    out(k, 0) = s[0];
    out(k, 1) = s[1];
  }
  return out;
}

namespace {

DatasetPair pairs_from_orbit(const Matrix& states, int n_train, int n_test, const std::string& name) {
  Dataset train{states.topRows(n_train), states.middleRows(1, n_train), name, Split::Train};
  Dataset test{states.middleRows(n_train, n_test), states.middleRows(n_train + 1, n_test), name, Split::Test};
  train.validate();
  test.validate();
  return {std::move(train), std::move(test)};
}

}  // namespace

DatasetPair ikeda_dataset(const IkedaDataOptions& o) {
  if (o.n_train < 1 || o.n_test < 1 || o.transient < 0) throw DataError("ikeda_dataset: invalid lengths");
  State2 s{};
  if (o.initial) {
    s = *o.initial;
  } else {
    std::mt19937_64 rng(o.seed);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    s = {u(rng), u(rng)};
  }
  for (int k = 0; k < o.transient; ++k) s = ikeda_step(s, o.params);
  const int total = o.n_train + o.n_test + 1;
  Matrix states(total, 2);
  for (int k = 0; k < total; ++k) {
    states(k, 0) = s[0];
    states(k, 1) = s[1];
    s = ikeda_step(s, o.params);
  }
  return pairs_from_orbit(states, o.n_train, o.n_test, "ikeda");
}

State3 ecosystem_rhs(const State3& s, const EcosystemParams& p) {
  const double n = s[0];
  const double pp = s[1];
  const double q = s[2];
  const double dn = n * (1.0 - n / p.K) - p.xp * p.yp * n * pp / (n + p.N0);
  const double dp = p.xp * pp * (p.yp * n / (n + p.N0) - 1.0) - p.xq * p.yq * pp * q / (pp + p.P0);
  const double dq = p.xq * q * (p.yq * pp / (pp + p.P0) - 1.0);
  return {dn, dp, dq};
}

Matrix integrate_rk4(const VectorField& rhs, const Vector& x0, double dt, int n_steps) {
  if (!(dt > 0.0)) throw DataError("integrate_rk4: dt must be positive");
  Matrix out(n_steps + 1, x0.size());
  Vector x = x0;
  out.row(0) = x.transpose();
  for (int k = 1; k <= n_steps; ++k) {
    const Vector k1 = rhs(x);
    const Vector k2 = rhs(x + 0.5 * dt * k1);
    const Vector k3 = rhs(x + 0.5 * dt * k2);
    const Vector k4 = rhs(x + dt * k3);
    x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!x.allFinite()) throw DataError("integrate_rk4: non-finite state at step " + std::to_string(k));
    out.row(k) = x.transpose();
  }
  return out;
}

namespace {

VectorField ecosystem_field(const EcosystemParams& p) {
  return [p](const Vector& v) {
    const State3 d = ecosystem_rhs({v(0), v(1), v(2)}, p);
    return Vector{{d[0], d[1], d[2]}};
  };
}

int substeps(double dt_sample, double dt) {
  const double ratio = dt_sample / dt;
  const int n = static_cast<int>(std::lround(ratio));
  if (n < 1 || std::abs(ratio - n) > 1e-9 * ratio) throw DataError("dt_sample must be a positive multiple of dt");
  return n;
}

}  // namespace

Vector ecosystem_flow(const Vector& state, double dt_sample, double dt, const EcosystemParams& params) {
  const Matrix path = integrate_rk4(ecosystem_field(params), state, dt, substeps(dt_sample, dt));
  return path.bottomRows(1).transpose();
}

DatasetPair ecosystem_dataset(const EcosystemDataOptions& o) {
  if (o.n_train < 1 || o.n_test < 1 || o.transient < 0) throw DataError("ecosystem_dataset: invalid lengths");
  const int sub = substeps(o.dt_sample, o.dt);
  Vector s(3);
  if (o.initial) {
    s << (*o.initial)[0], (*o.initial)[1], (*o.initial)[2];
  } else {
    // Initial conditions inside the basin of the chaotic attractor.
    std::mt19937_64 rng(o.seed);
    std::uniform_real_distribution<double> un(0.6, 0.8), up(0.2, 0.3), uq(0.75, 0.9);
    s << un(rng), up(rng), uq(rng);
  }
  const int total = o.n_train + o.n_test + 1;
  const Matrix path = integrate_rk4(ecosystem_field(o.params), s, o.dt, (o.transient + total - 1) * sub);
  Matrix states(total, 3);
  for (int k = 0; k < total; ++k) states.row(k) = path.row((o.transient + k) * sub);
  return pairs_from_orbit(states, o.n_train, o.n_test, "ecosystem");
}

double five_peaks(double x, const PeakCenters& centers) {
  double y = 0.0;
  for (double c : centers) y += std::exp(-300.0 * (x - c) * (x - c));
  return y;
}

namespace {

double half_window(const PeakCenters& centers) {
  for (std::size_t i = 1; i < centers.size(); ++i)
    if (!(centers[i] > centers[i - 1])) throw DataError("peak centers must be strictly increasing");
  double spacing = centers[1] - centers[0];
  for (std::size_t i = 2; i < centers.size(); ++i) spacing = std::min(spacing, centers[i] - centers[i - 1]);
  return 0.5 * spacing;
}

Matrix linspace(double lo, double hi, int n) {
  Matrix x(n, 1);
  for (int k = 0; k < n; ++k) x(k, 0) = n == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * k / (n - 1);
  return x;
}

Dataset peaks_on(const Matrix& x, const PeakCenters& centers, std::string name, Split split) {
  Matrix y(x.rows(), 1);
  for (Eigen::Index r = 0; r < x.rows(); ++r) y(r, 0) = five_peaks(x(r, 0), centers);
  return {x, std::move(y), std::move(name), split};
}

}  // namespace

std::vector<Dataset> gen_five_peaks(int n_per_peak, const PeakCenters& centers) {
  if (n_per_peak < 1) throw DataError("gen_five_peaks: need at least one point per peak");
  const double h = half_window(centers);
  std::vector<Dataset> phases;
  for (std::size_t i = 0; i < centers.size(); ++i)
    phases.push_back(peaks_on(linspace(centers[i] - h, centers[i] + h, n_per_peak), centers,
                              "five_peaks_phase" + std::to_string(i), Split::Train));
  return phases;
}

Dataset five_peaks_full_domain(int n_points, const PeakCenters& centers) {
  if (n_points < 1) throw DataError("five_peaks_full_domain: need at least one point");
  const double h = half_window(centers);
  return peaks_on(linspace(centers.front() - h, centers.back() + h, n_points), centers, "five_peaks_full", Split::Test);
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) {
    const auto b = field.find_first_not_of(" \t\r\"");
    const auto e = field.find_last_not_of(" \t\r\"");
    fields.push_back(b == std::string::npos ? std::string() : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path, const std::string& target_column,
                 const std::vector<std::string>& feature_columns) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open CSV file " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": missing header row");
  const auto header = split_fields(line);
  auto column_of = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw DataError(path.string() + ": no column named '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t target = column_of(target_column);
  std::vector<std::size_t> features;
  if (feature_columns.empty()) {
    for (std::size_t c = 0; c < header.size(); ++c)
      if (c != target) features.push_back(c);
  } else {
    for (const auto& name : feature_columns) features.push_back(column_of(name));
  }
  if (features.empty()) throw DataError(path.string() + ": no feature columns");

  std::vector<std::vector<double>> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size())
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                      " fields, found " + std::to_string(fields.size()));
    auto number = [&](std::size_t c) {
      const std::string& f = fields[c];
      char* end = nullptr;
      errno = 0;
      const double v = f.empty() ? 0.0 : std::strtod(f.c_str(), &end);
      if (f.empty() || end != f.c_str() + f.size() || errno == ERANGE || !std::isfinite(v))
        throw DataError(path.string() + ":" + std::to_string(line_no) + ": column '" + header[c] +
                        "' is missing or non-numeric");
      return v;
    };
    std::vector<double> row;
    for (std::size_t c : features) row.push_back(number(c));
    row.push_back(number(target));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError(path.string() + ": insufficient rows (no data after the header)");

  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto d = static_cast<Eigen::Index>(features.size());
  Dataset ds{Matrix(n, d), Matrix(n, 1), path.stem().string(), Split::Train};
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < d; ++c) ds.x(r, c) = rows[r][c];
    ds.y(r, 0) = rows[r][d];
  }
  return ds;
}

DatasetPair split(const Dataset& data, int n_train, int n_test, std::uint64_t seed) {
  if (n_train < 1 || n_test < 0) throw DataError("split: invalid sizes");
  if (static_cast<Eigen::Index>(n_train) + n_test > data.size())
    throw DataError("split: insufficient rows (" + std::to_string(data.size()) + " available, " +
                    std::to_string(n_train + n_test) + " requested)");
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(data.size()));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  auto take = [&](std::size_t start, int count, Split s) {
    Dataset out{Matrix(count, data.x.cols()), Matrix(count, data.y.cols()), data.name, s};
    for (int r = 0; r < count; ++r) {
      out.x.row(r) = data.x.row(idx[start + r]);
      out.y.row(r) = data.y.row(idx[start + r]);
    }
    return out;
  };
  return {take(0, n_train, Split::Train), take(static_cast<std::size_t>(n_train), n_test, Split::Test)};
}

void write_csv(const Dataset& data, const std::filesystem::path& path, const std::vector<std::string>& feature_names,
               const std::vector<std::string>& target_names) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out.precision(17);
  for (Eigen::Index c = 0; c < data.x.cols(); ++c)
    out << (c ? "," : "") << (c < static_cast<Eigen::Index>(feature_names.size()) ? feature_names[c] : "x" + std::to_string(c));
  for (Eigen::Index c = 0; c < data.y.cols(); ++c)
    out << ',' << (c < static_cast<Eigen::Index>(target_names.size()) ? target_names[c] : "y" + std::to_string(c));
  out << '\n';
  for (Eigen::Index r = 0; r < data.x.rows(); ++r) {
    for (Eigen::Index c = 0; c < data.x.cols(); ++c) out << (c ? "," : "") << data.x(r, c);
    for (Eigen::Index c = 0; c < data.y.cols(); ++c) out << ',' << data.y(r, c);
    out << '\n';
  }
}

}  // namespace mekan
