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

#ifndef IOTRACE_TESTS_TEST_UTIL_HPP
#define IOTRACE_TESTS_TEST_UTIL_HPP

#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "iotrace/analysis.hpp"

namespace iotrace::testing {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    std::string tmpl = (fs::temp_directory_path() / "iotrace-test-XXXXXX").string();
    std::vector<char> buf(tmpl.begin(), tmpl.end());
    buf.push_back('\0');
    if (!mkdtemp(buf.data())) std::abort();
    path_ = buf.data();
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

inline void write_bytes(const fs::path& p, std::size_t size, unsigned seed = 7) {
  std::ofstream out(p, std::ios::binary);
  std::mt19937 rng(seed);
  for (std::size_t i = 0; i < size; ++i)
    out.put(static_cast<char>(rng() & 0xff));
}

struct CommandResult {
  int exit_code = -1;
  std::string output;  // stdout+stderr
};

inline CommandResult run_command(const std::string& cmd) {
  CommandResult r;
  FILE* pipe = popen((cmd + " 2>&1").c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof(buf), pipe))
    r.output.append(buf, n);
  int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

inline fs::path bin_dir() { return IOTRACE_BIN_DIR; }
inline fs::path lib_dir() { return IOTRACE_LIB_DIR; }
inline fs::path fixture_bin() { return bin_dir() / "iotrace_fixture"; }
inline fs::path fixture_static_bin() { return bin_dir() / "iotrace_fixture_static"; }
inline fs::path cli_bin() { return bin_dir() / "iotrace"; }
inline fs::path preload_lib() { return lib_dir() / "libiotrace_preload.so"; }

/// Manifest with the shape reported for the malware-classification
/// dataset: 10,868 files, 48 GB nominal, 4,420 files under 2 MB holding
/// 3.7 GB, overall median near 4 MB. Deterministic.
inline Manifest paper_shaped_manifest() {
  Manifest m;
  constexpr std::uint64_t kSmallCount = 4420;
  constexpr std::uint64_t kSmallTotal = 3'700'000'000ULL;
  constexpr std::uint64_t kLargeCount = 10868 - kSmallCount;  // 6448
  constexpr std::uint64_t kLargeTotal = 48'000'000'000ULL - kSmallTotal;

  std::uint64_t base = kSmallTotal / kSmallCount;           // 837104
  std::uint64_t remainder = kSmallTotal - base * kSmallCount;
  for (std::uint64_t i = 0; i < kSmallCount; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "small_%05llu.bin",
                  static_cast<unsigned long long>(i));
    m.push_back({name, base + (i < remainder ? 1 : 0)});
  }

  // Linear ramp between 2.5 MB and the matching high end keeps every
  // large file above the 2 MB threshold and the overall median near 4 MB.
  const double lo = 2'500'000.0;
  const double avg = static_cast<double>(kLargeTotal) / kLargeCount;
  const double hi = 2 * avg - lo;
  std::uint64_t running = 0;
  for (std::uint64_t i = 0; i < kLargeCount; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "large_%05llu.bin",
                  static_cast<unsigned long long>(i));
    std::uint64_t size;
    if (i + 1 == kLargeCount) {
      size = kLargeTotal - running;  // land the sum exactly
    } else {
      double t = static_cast<double>(i) / static_cast<double>(kLargeCount - 1);
      size = static_cast<std::uint64_t>(lo + (hi - lo) * t);
    }
    running += size;
    m.push_back({name, size});
  }
  return m;
}

}  // namespace iotrace::testing

#endif  // IOTRACE_TESTS_TEST_UTIL_HPP
