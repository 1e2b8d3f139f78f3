#pragma once

#include <cstddef>
#include <functional>

namespace spgi {

/// Run body(i) for i in [0, n) on up to `threads` workers with a static
/// partition. Bodies must write to disjoint slots; results are then identical
/// for any thread count. Exceptions propagate to the caller.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body);

}  // namespace spgi
