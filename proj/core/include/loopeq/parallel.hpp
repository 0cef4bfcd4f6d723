#pragma once

#include <functional>

namespace loopeq {

// Runs body(i) for i in [0, n) on up to `threads` workers with static
// round-robin assignment.  Each index must write only to its own output
// slots; results are then independent of scheduling and thread count.
// The first exception thrown by any body is rethrown after all join.
void parallel_for(int n, int threads, const std::function<void(int)>& body);

}  // namespace loopeq
