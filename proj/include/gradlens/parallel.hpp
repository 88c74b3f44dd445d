#pragma once

#include <cstddef>
#include <functional>

namespace gradlens {

// Runs body(i) for i in [0, n) on up to `jobs` threads. Each index is handled
// exactly once; callers write results into per-index slots so the outcome does
// not depend on scheduling. jobs <= 1 runs inline.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& body);

}  // namespace gradlens
