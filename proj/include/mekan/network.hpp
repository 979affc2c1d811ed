#pragma once

#include "mekan/spline.hpp"
#include "mekan/types.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace mekan {

/// Layer widths [d, N_1, ..., N_{L-1}, m].
struct KanShape {
  std::vector<int> widths;

  void validate() const;
  int input_dim() const { return widths.front(); }
  int output_dim() const { return widths.back(); }
  /// Number of trunk layers L.
  int depth() const { return static_cast<int>(widths.size()) - 1; }

  friend bool operator==(const KanShape&, const KanShape&) = default;
};

/// Functional matrix between two adjacent layers. Activation (j, i) maps
/// input unit i to output unit j and is stored row-major.
struct KanLayer {
  int in_width = 0;
  int out_width = 0;
  std::vector<SplineActivation> acts;

  SplineActivation& at(int j, int i) { return acts[static_cast<std::size_t>(j * in_width + i)]; }
  const SplineActivation& at(int j, int i) const { return acts[static_cast<std::size_t>(j * in_width + i)]; }
};

/// Trunk layers plus one [N_k, m] exit layer branching from trunk depths
/// 0..L-2. The trunk output serves as the last head, so K = L heads in
/// multi-exit mode and K = 1 otherwise.
struct MultiExitKan {
  KanShape shape;
  bool multi_exit = false;
  std::vector<KanLayer> trunk;
  std::vector<KanLayer> exits;

  int num_heads() const { return static_cast<int>(exits.size()) + 1; }
  /// Trunk depth whose activations feed head k.
  int head_source_depth(int k) const { return k < static_cast<int>(exits.size()) ? k : shape.depth(); }
};

struct BuildOptions {
  BaseKind base_kind = BaseKind::SiLU;
  int grid_size = 3;
  int spline_order = 3;
  double grid_lo = -1.0;
  double grid_hi = 1.0;
  double init_sigma = 0.1;
  std::uint64_t seed = 0;
};

/// A shape with a single trunk layer ([d, m]) always yields a single-head model.
MultiExitKan build(const KanShape& shape, bool multi_exit, const BuildOptions& options = {});

/// One output matrix per head; element k is the exit-k prediction.
std::vector<Matrix> forward(const MultiExitKan& model, const Matrix& x);
/// Row-by-row reference without threading.
std::vector<Matrix> forward_serial(const MultiExitKan& model, const Matrix& x);

/// Forward outputs together with the trunk signals a^0 = x, ..., a^L.
struct ForwardPass {
  std::vector<Matrix> trunk_signals;
  std::vector<Matrix> heads;
};
ForwardPass forward_pass(const MultiExitKan& model, const Matrix& x);

std::size_t count_activations(const MultiExitKan& model);
std::size_t count_parameters(const MultiExitKan& model);

/// Where an activation sits. `layer` is the trunk layer index or the exit index.
struct ActivationSite {
  bool is_exit = false;
  int layer = 0;
  int j = 0;
  int i = 0;
};

/// Visits activations in parameter order: trunk layers first, then exits by
/// depth; within a layer (j, i) row-major.
void for_each_activation(const MultiExitKan& model,
                         const std::function<void(const ActivationSite&, const SplineActivation&)>& fn);
void for_each_activation(MultiExitKan& model, const std::function<void(const ActivationSite&, SplineActivation&)>& fn);

/// Coefficients concatenated in for_each_activation order, coefficient index
/// order within each activation.
Vector flatten_params(const MultiExitKan& model);
void load_params(MultiExitKan& model, const Vector& params);

void check_finite(const Matrix& x, const char* what);

}  // namespace mekan
