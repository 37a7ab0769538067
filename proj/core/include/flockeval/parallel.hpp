/* Copyright 2026 The Flockeval Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#ifndef FLOCKEVAL_PARALLEL_HPP_
#define FLOCKEVAL_PARALLEL_HPP_

#include <cstddef>
#include <functional>

namespace flockeval {

// Resolves a thread-count request: 0 means all hardware threads, anything
// else is clamped to at least 1.
std::size_t effective_threads(int requested);

// Runs fn(i) for i in [0, n). Each index must write only its own output
// slot; under that contract the result is identical for any thread count.
// The first exception thrown by any fn is rethrown on the calling thread.
void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t)>& fn);

}  // namespace flockeval

#endif  // FLOCKEVAL_PARALLEL_HPP_
