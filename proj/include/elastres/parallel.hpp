#pragma once
// Minimal static-partition parallel loop. Work items are split into contiguous
// chunks so that per-index results are deterministic regardless of the thread
// count (each index is computed by exactly one worker, no reductions).

#include <cstddef>
#include <functional>

namespace elastres {

void set_num_threads(int n);
int num_threads();

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace elastres
