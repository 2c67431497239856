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

#ifndef IOTRACE_HASH_HPP
#define IOTRACE_HASH_HPP

#include <cstdint>
#include <string>
#include <string_view>

namespace iotrace {

/// FNV-1a 64-bit. Record ids are this hash of the canonical path; the
/// store resolves the (astronomically rare) collision by probing, so ids
/// stay unique per store.
constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

/// Lexically-normalized absolute form of `path`: relative paths are
/// resolved against the current working directory, "." / ".." / duplicate
/// separators removed. Purely lexical — no symlink resolution, no
/// filesystem access beyond getcwd. Pseudo-paths (leading '<') pass
/// through unchanged.
std::string canonical_path(std::string_view path);

}  // namespace iotrace

#endif  // IOTRACE_HASH_HPP
