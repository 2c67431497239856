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

#ifndef IOTRACE_ANALYSIS_HPP
#define IOTRACE_ANALYSIS_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "iotrace/collector.hpp"
#include "iotrace/session.hpp"

namespace iotrace {

struct ManifestEntry {
  std::string path;
  std::uint64_t size = 0;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};
using Manifest = std::vector<ManifestEntry>;

/// Bucketed size counts (boundaries as bucket_for). For file-size
/// distributions, `unknown` counts records whose size could not be
/// inferred; that is reported rather than fatal.
struct SizeDistribution {
  std::array<std::uint64_t, kSizeBuckets> buckets{};
  std::uint64_t total = 0;
  std::uint64_t unknown = 0;

  std::size_t modal_bucket() const;
  double fraction(std::size_t bucket) const;
  friend bool operator==(const SizeDistribution&, const SizeDistribution&) = default;
};

struct OpCountSummary {
  std::uint64_t opens = 0;
  std::uint64_t closes = 0;
  std::uint64_t reads = 0;
  std::uint64_t writes = 0;
  std::uint64_t stdio_writes = 0;
  double reads_per_open = 0;  // 0 when opens == 0
};

struct AccessPatternSummary {
  std::uint64_t reads = 0;
  std::uint64_t zero_reads = 0;
  std::uint64_t seq_reads = 0;
  std::uint64_t consec_reads = 0;
  double frac_sequential = 0;
  double frac_consecutive = 0;
  double frac_random = 0;  // 1 - frac_sequential (consecutive ⊆ sequential)
  double frac_zero = 0;
};

enum class ZeroReadFinding { kNone, kTrailingEofReads };

struct ZeroReadDiagnostic {
  std::uint64_t zero_read_count = 0;
  std::uint64_t affected_file_count = 0;
  ZeroReadFinding finding = ZeroReadFinding::kNone;
};

struct StagingPlan {
  std::uint64_t threshold = 0;  // bytes; files of size <= threshold qualify
  Manifest files;               // selected, smallest-first
  std::uint64_t staged_bytes = 0;
  std::uint64_t staged_file_count = 0;
  double frac_bytes = 0;  // of total dataset bytes
  double frac_files = 0;  // of total file count
  std::optional<std::uint64_t> capacity;
};

struct BandwidthPoint {
  std::uint64_t window_id = 0;
  double read_mbps = 0;  // 1 MB = 10^6 bytes
  double write_mbps = 0;
};

OpCountSummary op_count_summary(const WindowStats& w);

/// Aggregate of the per-file read-size histograms over the window.
SizeDistribution read_size_distribution(const WindowStats& w);

SizeDistribution file_size_distribution(const Manifest& manifest);

/// File sizes inferred from observed max end offsets; records never read
/// or written count as unknown.
SizeDistribution file_size_distribution(const Snapshot& snap);

/// Throws EmptyWindow when the window saw no reads.
AccessPatternSummary pattern_summary(const WindowStats& w);

/// TRAILING_EOF_READS when zero-read count tracks the open count within
/// 5% — the signature of read loops that stop only on a zero-length read.
ZeroReadDiagnostic zero_read_diagnostic(const WindowStats& w);

/// All files at or under `threshold`, smallest-first until `capacity` (if
/// given) is exhausted. Selection is invariant under manifest permutation.
/// Throws EmptyManifest.
StagingPlan staging_advise(const Manifest& manifest, std::uint64_t threshold,
                           std::optional<std::uint64_t> capacity = {});

std::vector<BandwidthPoint> bandwidth_series(std::span<const WindowStats> windows);

/// Per-file row of the report's top-N table.
struct FileRow {
  std::uint64_t record_id = 0;
  std::string path;
  std::uint64_t opens = 0;
  std::uint64_t reads = 0;
  std::uint64_t writes = 0;
  std::uint64_t bytes_read = 0;
  std::uint64_t bytes_written = 0;
};

/// Everything a report renders: the four characterization panels
/// (bandwidth, op counts, read-size distribution, file-size distribution)
/// plus pattern summary, diagnostics, top files, bandwidth series and an
/// optional staging plan.
struct ReportBundle {
  std::string hostname;
  std::int64_t pid = 0;
  std::string run_id;
  double t_start_wall = 0;
  double elapsed = 0;
  std::uint64_t record_count = 0;
  OpCountSummary ops;
  double bandwidth_read_mbps = 0;
  double bandwidth_write_mbps = 0;
  SizeDistribution read_sizes;
  SizeDistribution file_sizes;
  std::optional<AccessPatternSummary> pattern;  // absent when no reads
  ZeroReadDiagnostic zero_diag;
  std::vector<FileRow> top_files;
  std::vector<BandwidthPoint> series;
  std::optional<StagingPlan> plan;
};

struct ReportOptions {
  std::size_t top_files = 10;
  std::optional<Manifest> manifest;  // preferred file-size source
  std::vector<WindowStats> series_windows;
  std::optional<StagingPlan> plan;
  std::string run_id;
};

/// Builds the bundle for one window; `stop` is the window's stop snapshot
/// (used for file sizes and the per-file table).
ReportBundle build_report(const WindowStats& whole, const Snapshot& stop,
                          const ReportOptions& opts = {});

}  // namespace iotrace

#endif  // IOTRACE_ANALYSIS_HPP
