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

#include "iotrace/analysis.hpp"

#include <unistd.h>

#include <algorithm>

#include "iotrace/clock.hpp"
#include "iotrace/errors.hpp"

namespace iotrace {

std::size_t SizeDistribution::modal_bucket() const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < kSizeBuckets; ++i)
    if (buckets[i] > buckets[best]) best = i;
  return best;
}

double SizeDistribution::fraction(std::size_t bucket) const {
  if (total == 0) return 0;
  return static_cast<double>(buckets[bucket]) / static_cast<double>(total);
}

OpCountSummary op_count_summary(const WindowStats& w) {
  OpCountSummary s;
  s.opens = w.totals.opens;
  s.closes = w.totals.closes;
  s.reads = w.totals.reads;
  s.writes = w.totals.writes;
  s.stdio_writes = w.totals.stdio_writes;
  s.reads_per_open = s.opens == 0 ? 0.0
                                  : static_cast<double>(s.reads) /
                                        static_cast<double>(s.opens);
  return s;
}

SizeDistribution read_size_distribution(const WindowStats& w) {
  SizeDistribution d;
  for (std::size_t i = 0; i < kSizeBuckets; ++i) {
    d.buckets[i] = w.totals.read_size_hist[i];
    d.total += d.buckets[i];
  }
  return d;
}

SizeDistribution file_size_distribution(const Manifest& manifest) {
  SizeDistribution d;
  for (const auto& e : manifest) {
    ++d.buckets[bucket_for(e.size)];
    ++d.total;
  }
  return d;
}

SizeDistribution file_size_distribution(const Snapshot& snap) {
  SizeDistribution d;
  for (const auto& [id, rec] : snap.records) {
    std::uint64_t size = std::max(rec->counters.max_read_offset,
                                  rec->counters.max_write_offset);
    bool touched = rec->counters.reads || rec->counters.writes ||
                   rec->counters.stdio_reads || rec->counters.stdio_writes;
    if (!touched) {
      ++d.unknown;
      continue;
    }
    ++d.buckets[bucket_for(size)];
    ++d.total;
  }
  return d;
}

AccessPatternSummary pattern_summary(const WindowStats& w) {
  if (w.totals.reads == 0)
    throw EmptyWindow("pattern summary needs at least one read in the window");
  AccessPatternSummary s;
  s.reads = w.totals.reads;
  s.zero_reads = w.totals.zero_reads;
  s.seq_reads = w.totals.seq_reads;
  s.consec_reads = w.totals.consec_reads;
  auto frac = [&](std::uint64_t n) {
    return static_cast<double>(n) / static_cast<double>(s.reads);
  };
  s.frac_sequential = frac(s.seq_reads);
  s.frac_consecutive = frac(s.consec_reads);
  s.frac_random = 1.0 - s.frac_sequential;
  s.frac_zero = frac(s.zero_reads);
  return s;
}

ZeroReadDiagnostic zero_read_diagnostic(const WindowStats& w) {
  ZeroReadDiagnostic d;
  d.zero_read_count = w.totals.zero_reads;
  for (const auto& [id, c] : w.per_file)
    if (c.zero_reads > 0) ++d.affected_file_count;
  std::uint64_t opens = w.totals.opens;
  if (opens > 0 && d.zero_read_count > 0) {
    double rel = std::abs(static_cast<double>(d.zero_read_count) -
                          static_cast<double>(opens)) /
                 static_cast<double>(opens);
    if (rel <= 0.05) d.finding = ZeroReadFinding::kTrailingEofReads;
  }
  return d;
}

StagingPlan staging_advise(const Manifest& manifest, std::uint64_t threshold,
                           std::optional<std::uint64_t> capacity) {
  if (manifest.empty()) throw EmptyManifest("staging needs a nonempty manifest");

  StagingPlan plan;
  plan.threshold = threshold;
  plan.capacity = capacity;

  std::uint64_t total_bytes = 0;
  Manifest eligible;
  for (const auto& e : manifest) {
    total_bytes += e.size;
    if (e.size <= threshold) eligible.push_back(e);
  }
  // Smallest-first maximizes file coverage per staged byte; path breaks
  // ties so the plan is permutation-invariant.
  std::sort(eligible.begin(), eligible.end(),
            [](const ManifestEntry& a, const ManifestEntry& b) {
              return a.size != b.size ? a.size < b.size : a.path < b.path;
            });
  for (const auto& e : eligible) {
    if (capacity && plan.staged_bytes + e.size > *capacity) break;
    plan.staged_bytes += e.size;
    plan.files.push_back(e);
  }
  plan.staged_file_count = plan.files.size();
  if (total_bytes > 0)
    plan.frac_bytes = static_cast<double>(plan.staged_bytes) /
                      static_cast<double>(total_bytes);
  plan.frac_files = static_cast<double>(plan.staged_file_count) /
                    static_cast<double>(manifest.size());
  return plan;
}

std::vector<BandwidthPoint> bandwidth_series(std::span<const WindowStats> windows) {
  std::vector<BandwidthPoint> out;
  out.reserve(windows.size());
  for (const auto& w : windows)
    out.push_back({w.window_id, w.bandwidth_read / 1e6, w.bandwidth_write / 1e6});
  return out;
}

ReportBundle build_report(const WindowStats& whole, const Snapshot& stop,
                          const ReportOptions& opts) {
  ReportBundle b;
  b.hostname = hostname();
  b.pid = getpid();
  b.run_id = opts.run_id;
  b.t_start_wall = whole.t_start_wall;
  b.elapsed = whole.elapsed;
  b.record_count = stop.records.size();
  b.ops = op_count_summary(whole);
  b.bandwidth_read_mbps = whole.bandwidth_read / 1e6;
  b.bandwidth_write_mbps = whole.bandwidth_write / 1e6;
  b.read_sizes = read_size_distribution(whole);
  b.file_sizes = opts.manifest ? file_size_distribution(*opts.manifest)
                               : file_size_distribution(stop);
  if (whole.totals.reads > 0) b.pattern = pattern_summary(whole);
  b.zero_diag = zero_read_diagnostic(whole);

  std::vector<FileRow> rows;
  for (const auto& [id, c] : whole.per_file) {
    FileRow r;
    r.record_id = id;
    auto pit = whole.paths.find(id);
    r.path = pit == whole.paths.end() ? std::string{} : pit->second;
    r.opens = c.opens + c.stdio_opens;
    r.reads = c.reads + c.stdio_reads;
    r.writes = c.writes + c.stdio_writes;
    r.bytes_read = c.bytes_read;
    r.bytes_written = c.bytes_written + c.stdio_bytes_written;
    rows.push_back(std::move(r));
  }
  std::sort(rows.begin(), rows.end(), [](const FileRow& a, const FileRow& b) {
    std::uint64_t ba = a.bytes_read + a.bytes_written;
    std::uint64_t bb = b.bytes_read + b.bytes_written;
    return ba != bb ? ba > bb : a.record_id < b.record_id;
  });
  if (rows.size() > opts.top_files) rows.resize(opts.top_files);
  b.top_files = std::move(rows);

  b.series = bandwidth_series(opts.series_windows);
  b.plan = opts.plan;
  return b;
}

}  // namespace iotrace
