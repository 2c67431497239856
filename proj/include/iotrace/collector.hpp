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

#ifndef IOTRACE_COLLECTOR_HPP
#define IOTRACE_COLLECTOR_HPP

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace iotrace {

/// Which instrumentation layer an operation came through.
enum class Family { kPosix, kStdio };

constexpr std::size_t kSizeBuckets = 10;

/// Upper bounds of the size histogram buckets, inclusive. First bucket is
/// [0,100]; the remaining bounds are 1024-based (1K=2^10 ... 1G=2^30) with
/// an extra 4M bound, matching the buckets Darshan-style profilers report.
/// Anything above 1G lands in the last bucket.
constexpr std::array<std::uint64_t, kSizeBuckets - 1> kBucketBounds = {
    100,        1024,        10240,        102400,       1048576,
    4194304,    10485760,    104857600,    1073741824};

/// Bucket index 0..9 for a transfer or file size.
constexpr std::size_t bucket_for(std::uint64_t size) {
  for (std::size_t i = 0; i < kBucketBounds.size(); ++i)
    if (size <= kBucketBounds[i]) return i;
  return kSizeBuckets - 1;
}

/// Human-readable label for a bucket, e.g. "(100K,1M]".
std::string bucket_label(std::size_t bucket);

enum class AccessClass { kConsecutive, kSequential, kRandom };

/// Classify an access at `offset` against the previous access's end
/// offset: CONSECUTIVE iff equal, SEQUENTIAL iff at-or-after, RANDOM
/// otherwise. A first access (no previous end) is SEQUENTIAL by
/// convention. Consecutive implies sequential for counter purposes.
constexpr AccessClass classify_access(std::optional<std::uint64_t> prev_end,
                                      std::uint64_t offset) {
  if (!prev_end) return AccessClass::kSequential;
  if (offset == *prev_end) return AccessClass::kConsecutive;
  if (offset > *prev_end) return AccessClass::kSequential;
  return AccessClass::kRandom;
}

/// One traced I/O operation. Zero-length segments are legal (and are how
/// the trailing-EOF-read signature shows up in a timeline viewer).
struct DxtSegment {
  enum class Kind { kRead, kWrite };
  Kind kind = Kind::kRead;
  std::uint64_t offset = 0;
  std::uint64_t length = 0;
  double t_start = 0;  // monotonic seconds
  double t_end = 0;

  friend bool operator==(const DxtSegment&, const DxtSegment&) = default;
};

/// Per-file counters. Counts and byte totals are monotonically
/// non-decreasing over a record's lifetime; max_* and t_* fields are
/// watermarks, not accumulators.
struct CounterSet {
  std::uint64_t opens = 0;
  std::uint64_t closes = 0;
  std::uint64_t reads = 0;
  std::uint64_t writes = 0;
  std::uint64_t bytes_read = 0;
  std::uint64_t bytes_written = 0;
  std::uint64_t zero_reads = 0;
  std::uint64_t seq_reads = 0;
  std::uint64_t consec_reads = 0;
  std::uint64_t seq_writes = 0;
  std::uint64_t consec_writes = 0;
  std::uint64_t max_read_offset = 0;   // max end offset (offset+length) seen
  std::uint64_t max_write_offset = 0;
  std::array<std::uint64_t, kSizeBuckets> read_size_hist{};
  std::array<std::uint64_t, kSizeBuckets> write_size_hist{};
  std::uint64_t stdio_opens = 0;
  std::uint64_t stdio_reads = 0;
  std::uint64_t stdio_writes = 0;
  std::uint64_t stdio_bytes_written = 0;
  double t_first_open = 0;  // monotonic; 0 = never
  double t_first_read = 0;
  double t_last_read = 0;
  double t_first_write = 0;
  double t_last_write = 0;

  bool all_zero() const;
  friend bool operator==(const CounterSet&, const CounterSet&) = default;
};

/// stop - start, per counter. Counts, bytes and histograms subtract;
/// watermark fields (max offsets, timestamps) carry the stop-side value.
CounterSet counter_delta(const CounterSet& stop, const CounterSet& start);

/// Aggregate a per-file delta into a running total. Counts add; max
/// offsets take the max; t_first_* the earliest nonzero; t_last_* the max.
void accumulate(CounterSet& total, const CounterSet& delta);

/// Everything kept for one file.
struct FileRecord {
  std::uint64_t record_id = 0;
  std::string path;  // canonical
  CounterSet counters;
  std::vector<DxtSegment> segments;  // ordered by t_start
  bool segments_truncated = false;

  friend bool operator==(const FileRecord&, const FileRecord&) = default;
};

/// Consistent point-in-time copy of all records. Immutable after
/// creation; cheap to hold (unchanged records are shared between
/// consecutive snapshots).
struct Snapshot {
  double t_wall = 0;
  double t_mono = 0;
  std::map<std::uint64_t, std::shared_ptr<const FileRecord>> records;

  const FileRecord* find(std::uint64_t record_id) const;
  const FileRecord* find_path(std::string_view canonical) const;
};

/// Field-by-field comparison (record contents, not pointers). Snapshot
/// timestamps are ignored.
bool same_records(const Snapshot& a, const Snapshot& b);

struct StoreConfig {
  bool dxt_enabled = true;
  std::uint32_t dxt_capacity = 1024;  // segments per record

  /// Reads IOTRACE_DXT (0/1) and IOTRACE_DXT_CAPACITY.
  static StoreConfig from_env();
};

/// One counter record per file plus a bounded per-operation trace buffer,
/// updated from interposed wrappers. Updates are safe from any number of
/// threads; snapshot() yields a store-wide consistent cut. Collection
/// never throws out of the on_* hooks — profiling must not fail the
/// application's I/O.
class RecordStore {
 public:
  explicit RecordStore(StoreConfig cfg = {});

  RecordStore(const RecordStore&) = delete;
  RecordStore& operator=(const RecordStore&) = delete;

  /// Registers (or re-opens) the record for `path` and binds `fd` to it
  /// with offset 0. Returns the record id.
  std::uint64_t on_open(std::string_view path, int fd, double t, Family family);

  /// Counts a close and unbinds the descriptor. Unknown descriptors are
  /// routed to the anonymous record.
  void on_close(int fd, double t, Family family);

  /// `explicit_offset` set for positional reads (pread); positional reads
  /// do not advance the descriptor offset, but both kinds update the
  /// previous-end offset used for sequential/consecutive classification.
  void on_read(int fd, std::optional<std::uint64_t> explicit_offset,
               std::uint64_t length_returned, double t0, double t1,
               Family family = Family::kPosix);

  void on_write(int fd, std::optional<std::uint64_t> explicit_offset,
                std::uint64_t length, double t0, double t1,
                Family family = Family::kPosix);

  /// Repositions the descriptor offset (lseek/fseek result).
  void on_seek(int fd, std::uint64_t new_offset);

  /// Deep, consistent copy of all records plus wall/monotonic timestamps.
  /// The store keeps collecting afterwards. Cost is proportional to the
  /// number of records touched since the previous snapshot.
  Snapshot snapshot();

  const StoreConfig& config() const { return cfg_; }

  /// Path used for operations on descriptors that were never opened
  /// through the instrumented layer.
  static constexpr std::string_view kAnonymousPath = "<anonymous>";

 private:
  struct RecordSlot {
    std::shared_ptr<FileRecord> live;
    std::shared_ptr<const FileRecord> published;
    bool dirty = true;
  };
  struct FdState {
    RecordSlot* slot = nullptr;
    std::uint64_t offset = 0;
    std::optional<std::uint64_t> prev_read_end;
    std::optional<std::uint64_t> prev_write_end;
  };

  RecordSlot& record_for_path_locked(std::string_view path);
  FdState& fd_state_locked(int fd);

  mutable std::mutex mu_;
  StoreConfig cfg_;
  std::unordered_map<std::string, RecordSlot> by_path_;
  std::unordered_map<std::uint64_t, std::string> id_to_path_;
  std::unordered_map<int, FdState> fds_;
};

}  // namespace iotrace

#endif  // IOTRACE_COLLECTOR_HPP
