// Copyright 2026 The iotrace Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef IOTRACE_CLOCK_HPP
#define IOTRACE_CLOCK_HPP

#include <ctime>
#include <string>

namespace iotrace {

/// Monotonic seconds (CLOCK_MONOTONIC, sub-microsecond resolution).
/// All operation timestamps use this clock; wall time is only sampled
/// at snapshot boundaries for labeling.
inline double mono_now() {
  timespec ts{};
  clock_gettime(CLOCK_MONOTONIC, &ts);
  return static_cast<double>(ts.tv_sec) + static_cast<double>(ts.tv_nsec) * 1e-9;
}

/// Wall-clock seconds since the epoch.
inline double wall_now() {
  timespec ts{};
  clock_gettime(CLOCK_REALTIME, &ts);
  return static_cast<double>(ts.tv_sec) + static_cast<double>(ts.tv_nsec) * 1e-9;
}

std::string hostname();

}  // namespace iotrace

#endif  // IOTRACE_CLOCK_HPP
