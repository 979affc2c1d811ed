#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mekan {

/// Row-major dense matrix; rows are samples, columns are features.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or non-finite input data, or mismatched dimensions.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Invalid network shape or parameter vector.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Invalid run configuration; `key_path()` names the offending entry.
class ConfigError : public Error {
 public:
  ConfigError(std::string key_path, const std::string& message)
      : Error(key_path.empty() ? message : key_path + ": " + message), key_path_(std::move(key_path)) {}
  const std::string& key_path() const noexcept { return key_path_; }

 private:
  std::string key_path_;
};

/// The joint loss became NaN or infinite. `exit_index()` is -1 for the
/// regularization term.
class NonFiniteLossError : public Error {
 public:
  NonFiniteLossError(int exit_index, const std::string& message)
      : Error(message), exit_index_(exit_index) {}
  int exit_index() const noexcept { return exit_index_; }

 private:
  int exit_index_;
};

/// Training aborted; carries the stage (grid index or phase) and iteration.
class TrainingError : public Error {
 public:
  TrainingError(int stage, int iteration, const std::string& message)
      : Error(message), stage_(stage), iteration_(iteration) {}
  int stage() const noexcept { return stage_; }
  int iteration() const noexcept { return iteration_; }

 private:
  int stage_;
  int iteration_;
};

}  // namespace mekan
