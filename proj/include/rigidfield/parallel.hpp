#pragma once

#include <cstddef>
#include <functional>

namespace rigidfield {

/// Worker count: hardware concurrency capped by RIGIDFIELD_THREADS.
int worker_count();

/// Runs body(i) for i in [0, count), split into contiguous chunks across
/// workers. body must only write to index-private storage.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace rigidfield
