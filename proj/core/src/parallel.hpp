#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace dropnet::detail {

/// Worker count for a request; 0 means one per hardware thread.
std::size_t resolve_threads(std::size_t requested);

/// Runs task(i) for every i in [0, count) on up to `threads` workers.
/// Tasks must write only to their own slot of any shared output.
void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& task);

/// Pairwise (tree) sum; the result depends only on the values and their order.
double pairwise_sum(std::span<const double> values);

}  // namespace dropnet::detail
