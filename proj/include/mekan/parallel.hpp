#pragma once

#include <optional>

namespace mekan {

/// Threads used by forward and loss_and_grad kernels.
int max_threads();
void set_num_threads(int n);

/// An explicit request wins, then MEKAN_THREADS, then the OpenMP default.
/// Nonpositive or unparsable values are ignored.
int resolve_thread_count(std::optional<int> requested);

}  // namespace mekan
