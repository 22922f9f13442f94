// Copyright 2026 The Curate Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CURATE_PARALLEL_H_
#define CURATE_PARALLEL_H_

#include <cstddef>
#include <functional>

namespace curate {

// Process-wide worker count used by ParallelFor. 0 means hardware
// concurrency. Values are clamped to at least 1.
void SetThreadCount(unsigned threads);
unsigned ThreadCount();

// Runs body(i) for i in [begin, end) on contiguous chunks. Bodies must only
// write to index-owned state; results are then independent of the worker
// count. The first exception thrown by any body is rethrown after all
// workers join.
void ParallelFor(std::size_t begin, std::size_t end,
                 const std::function<void(std::size_t)>& body);

}  // namespace curate

#endif  // CURATE_PARALLEL_H_
