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

#ifndef IOTRACE_WORKLOAD_HPP
#define IOTRACE_WORKLOAD_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "iotrace/analysis.hpp"
#include "iotrace/collector.hpp"
#include "iotrace/export.hpp"
#include "iotrace/session.hpp"

namespace iotrace {

/// Synthetic dataset description. Generation is deterministic under a
/// fixed seed.
struct DatasetSpec {
  enum class SizeModel { kFixed, kLognormal, kManifest };
  SizeModel model = SizeModel::kFixed;
  std::uint64_t file_count = 0;   // ignored for kManifest
  std::uint64_t fixed_size = 0;   // kFixed
  std::uint64_t median_bytes = 0; // kLognormal
  double sigma = 0.5;             // kLognormal
  std::filesystem::path manifest_path;  // kManifest: sizes from this manifest
  double on_disk_scale = 1.0;  // kManifest: bytes written = size * scale
  std::uint64_t seed = 1;
};

/// Writes the dataset under out_dir plus a manifest.tsv (path TAB size);
/// for kManifest the manifest keeps the nominal sizes even when files are
/// written scaled down. Returns the manifest.
Manifest make_dataset(const DatasetSpec& spec, const std::filesystem::path& out_dir);

Manifest load_manifest(const std::filesystem::path& path);
void save_manifest(const Manifest& manifest, const std::filesystem::path& path);

/// STREAM-style ingestion workload: reader threads pull paths from a
/// shared queue and read each file in chunk_size positional reads (until
/// a read returns zero when emulate_trailing_zero_read); completed
/// samples form batches feeding a bounded prefetch queue drained by the
/// pacing (step) loop.
struct WorkloadConfig {
  std::filesystem::path dataset_dir;
  std::uint64_t batch_size = 128;
  std::uint64_t steps = 100;
  std::uint64_t threads = 16;
  std::uint64_t prefetch_depth = 10;
  std::uint64_t chunk_size = 1 << 20;
  bool emulate_trailing_zero_read = true;
  std::optional<std::uint64_t> checkpoint_every;  // steps
  std::uint64_t writes_per_checkpoint = 140;
  std::uint64_t bytes_per_write = 4096;
  double compute_time_s = 0;  // pacing sleep per step; 0 = pure STREAM
  std::uint64_t window_every_steps = 0;  // 0 = whole-run window only
  /// Quiesce in-flight file reads at window boundaries so per-window
  /// counts cut exactly where the oracle cuts. Off for overhead runs.
  bool sync_windows = true;
  bool shuffle = false;
  std::uint64_t seed = 1;
};

/// Ground truth of every I/O the generator issued, written by the
/// generator itself (the in-process analog of a background disk monitor).
struct OracleEntry {
  enum class Kind { kOpen, kClose, kRead, kWrite };
  Kind kind = Kind::kRead;
  int thread = 0;
  std::uint32_t path_index = 0;  // into OracleLog::paths
  std::uint64_t offset = 0;
  std::uint64_t length = 0;
  double t0 = 0;
  double t1 = 0;
};

struct OracleLog {
  std::string run_id;
  std::vector<std::string> paths;
  std::vector<OracleEntry> entries;  // ordered by t0

  std::uint64_t total_bytes_read() const;
  std::uint64_t total_reads() const;
  std::uint64_t total_opens() const;
  /// Bytes of reads completing within (t_lo, t_hi].
  std::uint64_t bytes_read_between(double t_lo, double t_hi) const;

  void save(const std::filesystem::path& path) const;
  static OracleLog load(const std::filesystem::path& path);  // MismatchedRun if truncated
};

struct StreamResult {
  std::string run_id;
  std::vector<WindowStats> windows;  // periodic windows (empty if none)
  WindowStats whole;                 // whole-run window
  ProfilingWindow whole_window;      // snapshots bounding the run
  OracleLog oracle;
  std::uint64_t files_consumed = 0;
  std::uint64_t steps_done = 0;
  std::uint64_t prefetch_peak = 0;  // max batches the queue ever held
  double wall_seconds = 0;
};

/// Runs the workload against `store`. Interposition is the caller's
/// choice via `policy` (runtime attach for the built-in runs, kNone to
/// exercise the generator alone).
StreamResult run_stream(RecordStore& store, const WorkloadConfig& cfg,
                        const Manifest& manifest, const AttachmentPolicy& policy);

struct CheckpointResult {
  WindowStats whole;
  std::uint64_t expected_stdio_writes = 0;
  std::uint64_t expected_bytes = 0;
};

/// Bursts of buffered (STDIO) writes: n_checkpoints files, each written
/// with writes_per_checkpoint fwrite calls of bytes_per_write bytes.
CheckpointResult run_checkpoint_emulation(RecordStore& store,
                                          const std::filesystem::path& dir,
                                          std::uint64_t n_checkpoints,
                                          std::uint64_t writes_per_checkpoint,
                                          std::uint64_t bytes_per_write,
                                          const AttachmentPolicy& policy);

/// Serialized per-window rows (the windows.json artifact).
struct WindowRow {
  std::uint64_t window_id = 0;
  double t_start_mono = 0;
  double t_stop_mono = 0;
  std::uint64_t opens = 0;
  std::uint64_t reads = 0;
  std::uint64_t bytes_read = 0;
  double bandwidth_read = 0;  // bytes/s
};

struct RunArtifacts {
  std::string run_id;
  std::vector<WindowRow> windows;  // periodic windows, in order
  WindowRow whole;                 // the whole-run window
};

void save_run_artifacts(const RunArtifacts& a, const std::filesystem::path& path);
RunArtifacts load_run_artifacts(const std::filesystem::path& path);

WindowRow window_row(const WindowStats& w);

struct WindowVerdict {
  std::uint64_t window_id = 0;
  std::uint64_t profiler_bytes = 0;
  std::uint64_t oracle_bytes = 0;
  double profiler_bw = 0;
  double oracle_bw = 0;
  bool bytes_exact = false;
  bool bandwidth_ok = false;
};

struct ValidationReport {
  bool pass = false;
  double tolerance = 0.05;
  std::vector<WindowVerdict> windows;
  std::string detail;
};

/// Compares per-window byte deltas and bandwidth against the oracle over
/// the same spans. PASS iff bytes match exactly and bandwidth is within
/// tolerance. Throws MismatchedRun when the inputs are not from the same
/// run.
ValidationReport validate_run(const RunArtifacts& artifacts, const OracleLog& oracle,
                              double tolerance = 0.05);

struct OverheadConfig {
  int repetitions = 5;
  std::uint64_t window_every_steps = 5;
  std::uint64_t seed = 1;
};

struct OverheadResult {
  double t_off = 0;          // mean seconds, profiling off
  double t_on_whole = 0;     // whole-run window, tracing + in-situ analysis
  double t_on_periodic = 0;  // periodic counters-only windows
  double ratio_whole = 0;    // overhead vs t_off
  double ratio_periodic = 0;
  int repetitions = 0;
};

/// Times the same workload three ways in randomized order (profiling
/// off / whole-run window with trace collection / periodic bandwidth
/// windows), `repetitions` times each, reporting means. Artifact writing
/// is excluded from the timed region; in-situ analysis is included.
OverheadResult measure_overhead(const WorkloadConfig& base, const Manifest& manifest,
                                const OverheadConfig& cfg);

std::string make_run_id(std::uint64_t seed);

}  // namespace iotrace

#endif  // IOTRACE_WORKLOAD_HPP
