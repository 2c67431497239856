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
//
// Tiny workload fixture with compile-time-known operation counts, driven
// by the test suites (directly, under LD_PRELOAD, and as a static build
// for the unreadable-relocations case).
//
//   simple <file> <n>  : n x (open, read whole file, close)
//   mixed  <file> <n>  : n x (open, read half, pread half, close)
//   stdio  <file> <n>  : n x (fopen, fread whole, fclose)
//   scan-self <sym>... : scan own relocations for the named symbols

#include <fcntl.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include "iotrace/errors.hpp"
#include "iotrace/hash.hpp"
#include "iotrace/interpose.hpp"

namespace {

std::uint64_t file_size(const char* path) {
  FILE* f = std::fopen(path, "rb");
  if (!f) return 0;
  std::fseek(f, 0, SEEK_END);
  long size = std::ftell(f);
  std::fclose(f);
  return size < 0 ? 0 : static_cast<std::uint64_t>(size);
}

int run_simple(const char* path, int n) {
  std::uint64_t size = file_size(path);
  std::vector<char> buf(size ? size : 1);
  std::uint64_t checksum = 1469598103934665603ULL;
  std::uint64_t bytes = 0;
  for (int i = 0; i < n; ++i) {
    int fd = ::open(path, O_RDONLY);
    if (fd < 0) return 2;
    ssize_t got = ::read(fd, buf.data(), buf.size());
    if (got < 0) return 2;
    bytes += static_cast<std::uint64_t>(got);
    checksum = iotrace::fnv1a64(std::string_view(buf.data(), got)) ^ checksum;
    ::close(fd);
  }
  std::printf("opens=%d reads=%d closes=%d bytes=%llu checksum=%016llx\n", n, n,
              n, static_cast<unsigned long long>(bytes),
              static_cast<unsigned long long>(checksum));
  return 0;
}

int run_mixed(const char* path, int n) {
  std::uint64_t size = file_size(path);
  std::uint64_t half = size / 2;
  std::vector<char> buf(size ? size : 1);
  std::uint64_t bytes = 0;
  for (int i = 0; i < n; ++i) {
    int fd = ::open(path, O_RDONLY);
    if (fd < 0) return 2;
    ssize_t a = ::read(fd, buf.data(), half);
    ssize_t b = ::pread(fd, buf.data() + half, size - half,
                        static_cast<off_t>(half));
    if (a < 0 || b < 0) return 2;
    bytes += static_cast<std::uint64_t>(a + b);
    ::close(fd);
  }
  std::printf("opens=%d reads=%d closes=%d bytes=%llu\n", n, 2 * n, n,
              static_cast<unsigned long long>(bytes));
  return 0;
}

int run_stdio(const char* path, int n) {
  std::uint64_t size = file_size(path);
  std::vector<char> buf(size ? size : 1);
  std::uint64_t bytes = 0;
  for (int i = 0; i < n; ++i) {
    FILE* f = ::fopen(path, "rb");
    if (!f) return 2;
    bytes += ::fread(buf.data(), 1, buf.size(), f);
    ::fclose(f);
  }
  std::printf("stdio_opens=%d stdio_reads=%d closes=%d bytes=%llu\n", n, n, n,
              static_cast<unsigned long long>(bytes));
  return 0;
}

int run_scan_self(int argc, char** argv) {
  std::vector<iotrace::SymbolTarget> targets;
  for (int i = 0; i < argc; ++i)
    targets.push_back({argv[i], iotrace::SymbolFamily::kPosix});
  try {
    auto slots = iotrace::scan_relocations(targets);
    std::printf("slots=%zu\n", slots.size());
    for (const auto& s : slots)
      std::printf("  %s %s\n", s.object_name.c_str(), s.symbol.name.c_str());
    return 0;
  } catch (const iotrace::RelocationUnreadable& e) {
    std::printf("RelocationUnreadable: %s\n", e.what());
    return 5;
  }
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: %s simple|mixed|stdio|scan-self ...\n", argv[0]);
    return 3;
  }
  std::string mode = argv[1];
  if (mode == "scan-self") return run_scan_self(argc - 2, argv + 2);
  if (argc < 4) {
    std::fprintf(stderr, "usage: %s %s <file> <n>\n", argv[0], mode.c_str());
    return 3;
  }
  int n = std::atoi(argv[3]);
  if (mode == "simple") return run_simple(argv[2], n);
  if (mode == "mixed") return run_mixed(argv[2], n);
  if (mode == "stdio") return run_stdio(argv[2], n);
  std::fprintf(stderr, "unknown mode %s\n", mode.c_str());
  return 3;
}
