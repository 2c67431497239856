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
// Acceptance suite. Each criterion runs end to end and prints one
// PASS/FAIL line; the binary exits nonzero if any criterion fails.

#include <fcntl.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "iotrace/analysis.hpp"
#include "iotrace/clock.hpp"
#include "iotrace/collector.hpp"
#include "iotrace/errors.hpp"
#include "iotrace/export.hpp"
#include "iotrace/hash.hpp"
#include "iotrace/hooks.hpp"
#include "iotrace/interpose.hpp"
#include "iotrace/session.hpp"
#include "iotrace/workload.hpp"
#include "oracle.hpp"
#include "test_util.hpp"

using namespace iotrace;
using iotrace::testing::paper_shaped_manifest;
using iotrace::testing::TempDir;
using iotrace::testing::write_bytes;

namespace {

struct Check {
  bool ok = true;
  std::ostringstream detail;

  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail << "    failed: " << what << "\n";
    }
  }
  template <typename T>
  void expect_eq(T got, T want, const std::string& what) {
    if (!(got == want)) {
      ok = false;
      detail << "    failed: " << what << " (got " << got << ", want " << want
             << ")\n";
    }
  }
  void expect_near(double got, double want, double tol, const std::string& what) {
    if (std::abs(got - want) > tol) {
      ok = false;
      detail << "    failed: " << what << " (got " << got << ", want " << want
             << " +- " << tol << ")\n";
    }
  }
};

AttachmentPolicy exe_policy() {
  AttachmentPolicy p;
  p.kind = AttachmentPolicy::Kind::kRuntime;
  p.scan.object_filter = {"[exe]"};
  return p;
}

Manifest fixed_dataset(const std::filesystem::path& dir, std::uint64_t files,
                       std::uint64_t size, std::uint64_t seed = 1) {
  DatasetSpec spec;
  spec.model = DatasetSpec::SizeModel::kFixed;
  spec.file_count = files;
  spec.fixed_size = size;
  spec.seed = seed;
  return make_dataset(spec, dir);
}

// 1. Exact accounting: STREAM over 1,000 x 64 KiB, profiler counters equal
//    the oracle log exactly; runtime under 60 s.
Check criterion1(const TempDir& tmp) {
  Check c;
  double t0 = mono_now();
  Manifest m = fixed_dataset(tmp.path() / "c1", 1000, 64 * 1024);
  WorkloadConfig cfg;
  cfg.dataset_dir = tmp.path() / "c1";
  cfg.batch_size = 10;
  cfg.steps = 100;
  cfg.threads = 4;
  cfg.prefetch_depth = 10;
  RecordStore store;
  StreamResult r = run_stream(store, cfg, m, exe_policy());
  c.expect_eq(r.whole.totals.opens, r.oracle.total_opens(), "opens == oracle");
  c.expect_eq(r.whole.totals.reads, r.oracle.total_reads(), "reads == oracle");
  c.expect_eq(r.whole.totals.bytes_read, r.oracle.total_bytes_read(),
              "bytes == oracle");
  c.expect_eq(r.whole.totals.opens, std::uint64_t{1000}, "1000 opens");
  c.expect_eq(r.whole.totals.bytes_read, std::uint64_t{1000} * 64 * 1024,
              "64 MiB read");
  double elapsed = mono_now() - t0;
  c.expect(elapsed < 60.0, "runtime < 60 s (got " + std::to_string(elapsed) + ")");
  return c;
}

// 2. Windowed bandwidth: 20 windows partition the total exactly; each
//    window's bandwidth within 5% of the oracle over the same span.
Check criterion2(const TempDir& tmp) {
  Check c;
  Manifest m = fixed_dataset(tmp.path() / "c2", 1000, 64 * 1024, 2);
  WorkloadConfig cfg;
  cfg.dataset_dir = tmp.path() / "c2";
  cfg.batch_size = 10;
  cfg.steps = 100;
  cfg.threads = 4;
  cfg.window_every_steps = 5;
  cfg.sync_windows = true;
  RecordStore store;
  StreamResult r = run_stream(store, cfg, m, exe_policy());
  c.expect_eq(r.windows.size(), std::size_t{20}, "20 windows");

  std::uint64_t sum = 0;
  for (const auto& w : r.windows) sum += w.totals.bytes_read;
  c.expect_eq(sum, r.whole.totals.bytes_read, "window deltas partition the total");

  RunArtifacts artifacts;
  artifacts.run_id = r.run_id;
  for (const auto& w : r.windows) artifacts.windows.push_back(window_row(w));
  artifacts.whole = window_row(r.whole);
  ValidationReport report = validate_run(artifacts, r.oracle, 0.05);
  c.expect(report.pass, "per-window bandwidth within 5% of oracle\n" + report.detail);
  return c;
}

// 3. Zero-read signature: whole-file reads plus trailing zero read.
Check criterion3(const TempDir& tmp) {
  Check c;
  Manifest m = fixed_dataset(tmp.path() / "c3", 500, 88'000, 3);
  WorkloadConfig cfg;
  cfg.dataset_dir = tmp.path() / "c3";
  cfg.batch_size = 10;
  cfg.steps = 50;
  cfg.threads = 4;
  cfg.emulate_trailing_zero_read = true;
  RecordStore store;
  StreamResult r = run_stream(store, cfg, m, exe_policy());
  auto ops = op_count_summary(r.whole);
  c.expect_near(ops.reads_per_open, 2.0, 0.01, "reads_per_open = 2.0 +- 0.01");
  auto pattern = pattern_summary(r.whole);
  c.expect_near(pattern.frac_zero, 0.50, 0.01, "frac_zero = 0.50 +- 0.01");
  auto diag = zero_read_diagnostic(r.whole);
  c.expect(diag.finding == ZeroReadFinding::kTrailingEofReads,
           "zero_read_diagnostic = TRAILING_EOF_READS");
  return c;
}

// 4. Segmented-read distribution: 4 MiB files in 1 MiB chunks.
Check criterion4(const TempDir& tmp) {
  Check c;
  Manifest m = fixed_dataset(tmp.path() / "c4", 40, 4 * 1024 * 1024, 4);
  WorkloadConfig cfg;
  cfg.dataset_dir = tmp.path() / "c4";
  cfg.batch_size = 8;
  cfg.steps = 5;
  cfg.threads = 2;
  cfg.chunk_size = 1 << 20;
  RecordStore store;
  StreamResult r = run_stream(store, cfg, m, exe_policy());
  auto dist = read_size_distribution(r.whole);
  c.expect_eq(dist.modal_bucket(), std::size_t{4},
              "modal bucket is (100K,1M]");
  auto pattern = pattern_summary(r.whole);
  c.expect_near(pattern.frac_zero, 0.20, 0.01, "zero-read fraction 0.20 +- 0.01");
  c.expect(pattern.frac_sequential == 1.0, "frac_sequential = 1.0");
  return c;
}

// 5. Checkpoint capture: 10 x 140 buffered writes, exactly.
Check criterion5(const TempDir& tmp) {
  Check c;
  RecordStore store;
  CheckpointResult r = run_checkpoint_emulation(store, tmp.path() / "c5", 10, 140,
                                                4096, exe_policy());
  c.expect_eq(r.whole.totals.stdio_writes, std::uint64_t{1400},
              "stdio_writes = 1,400 exactly");
  return c;
}

// 6. Staging plan on the paper-shaped manifest (dataset on disk scaled
//    1000x down; nominal sizes kept in the manifest).
Check criterion6(const TempDir& tmp) {
  Check c;
  Manifest nominal = paper_shaped_manifest();
  save_manifest(nominal, tmp.path() / "nominal.tsv");
  DatasetSpec spec;
  spec.model = DatasetSpec::SizeModel::kManifest;
  spec.manifest_path = tmp.path() / "nominal.tsv";
  spec.on_disk_scale = 0.001;
  Manifest written = make_dataset(spec, tmp.path() / "c6");
  Manifest loaded = load_manifest(tmp.path() / "c6" / "manifest.tsv");
  c.expect_eq(loaded.size(), std::size_t{10'868}, "10,868 manifest entries");

  StagingPlan plan = staging_advise(loaded, 2'000'000);
  c.expect_eq(plan.staged_file_count, std::uint64_t{4'420},
              "staged_file_count = 4,420");
  c.expect_near(plan.frac_bytes, 0.077, 0.005, "frac_bytes = 0.077 +- 0.005");
  c.expect_near(plan.frac_files, 0.407, 0.005, "frac_files = 0.407 +- 0.005");
  return c;
}

// 7. Overhead: whole-run-window profiling <= 25% over baseline; periodic
//    windows cost no more than the whole-run profile (direction only).
Check criterion7(const TempDir& tmp) {
  Check c;
  Manifest m = fixed_dataset(tmp.path() / "c7", 3000, 16 * 1024, 7);
  WorkloadConfig cfg;
  cfg.dataset_dir = tmp.path() / "c7";
  cfg.batch_size = 30;
  cfg.steps = 100;
  cfg.threads = 2;
  OverheadConfig oc;
  oc.repetitions = 5;
  oc.window_every_steps = 5;
  OverheadResult r = measure_overhead(cfg, m, oc);
  std::printf("    off %.4fs whole %.4fs (%+.1f%%) periodic %.4fs (%+.1f%%)\n",
              r.t_off, r.t_on_whole, r.ratio_whole * 100, r.t_on_periodic,
              r.ratio_periodic * 100);
  c.expect(r.ratio_whole <= 0.25,
           "whole-run overhead <= 25% (got " +
               std::to_string(r.ratio_whole * 100) + "%)");
  c.expect(r.t_on_periodic <= r.t_on_whole,
           "periodic overhead <= whole-run overhead (got " +
               std::to_string(r.t_on_periodic) + " vs " +
               std::to_string(r.t_on_whole) + ")");
  return c;
}

// 8. Interposition correctness: bit-identical slot restore, zero missed /
//    zero spurious events, application-visible contents unchanged.
Check criterion8(const TempDir& tmp) {
  Check c;
  std::filesystem::create_directories(tmp.path() / "c8");
  std::string path = (tmp.path() / "c8" / "probe.bin").string();
  write_bytes(path, 65536, 8);

  auto targets = std::vector<SymbolTarget>(symbol_catalog().begin(),
                                           symbol_catalog().end());
  ScanOptions opts;
  opts.object_filter = {"[exe]"};

  auto slots = scan_relocations(targets, opts);
  std::vector<void*> before;
  for (const auto& s : slots)
    before.push_back(__atomic_load_n(s.slot_address, __ATOMIC_SEQ_CST));

  std::vector<char> plain(65536);
  {
    int fd = ::open(path.c_str(), O_RDONLY);
    c.expect(::pread(fd, plain.data(), plain.size(), 0) == 65536, "plain read");
    ::close(fd);
  }

  constexpr int kIterations = 25;
  RecordStore store;
  hooks::set_active_store(&store);
  hooks::resolve_real_symbols();
  AttachmentState state = attach(targets, hooks::wrapper_table(targets), opts);
  c.expect(state.mode == AttachMode::kRuntime, "attached");

  std::vector<char> traced(65536);
  for (int i = 0; i < kIterations; ++i) {
    int fd = ::open(path.c_str(), O_RDONLY);
    ssize_t a = ::read(fd, traced.data(), 32768);
    ssize_t b = ::pread(fd, traced.data() + 32768, 32768, 32768);
    c.expect(a == 32768 && b == 32768, "traced reads return full lengths");
    ::close(fd);
  }
  state = detach(std::move(state));
  hooks::set_active_store(nullptr);

  // zero missed / zero spurious against the known call counts
  Snapshot snap = store.snapshot();
  const FileRecord* rec = snap.find_path(canonical_path(path));
  c.expect(rec != nullptr, "probe record exists");
  if (rec) {
    c.expect_eq(rec->counters.opens, std::uint64_t{kIterations}, "opens exact");
    c.expect_eq(rec->counters.reads, std::uint64_t{2 * kIterations}, "reads exact");
    c.expect_eq(rec->counters.closes, std::uint64_t{kIterations}, "closes exact");
    c.expect_eq(rec->counters.bytes_read, std::uint64_t{65536} * kIterations,
                "bytes exact");
  }

  c.expect(plain == traced, "contents bit-identical with profiling on");

  auto slots_after = scan_relocations(targets, opts);
  c.expect_eq(slots_after.size(), slots.size(), "same slot set after detach");
  for (std::size_t i = 0; i < slots_after.size(); ++i)
    c.expect(__atomic_load_n(slots_after[i].slot_address, __ATOMIC_SEQ_CST) ==
                 before[i],
             "slot " + slots_after[i].symbol.name + " restored bit-identical");
  return c;
}

// 9. Export validity: trace files parse as trace-event JSON arrays;
//    write_log/load_log round-trips 100 randomized snapshots.
Check criterion9(const TempDir& tmp) {
  Check c;
  // A real traced run for the trace file.
  Manifest m = fixed_dataset(tmp.path() / "c9", 50, 16 * 1024, 9);
  WorkloadConfig cfg;
  cfg.dataset_dir = tmp.path() / "c9";
  cfg.batch_size = 5;
  cfg.steps = 10;
  cfg.threads = 2;
  StoreConfig sc;
  sc.dxt_enabled = true;
  RecordStore store(sc);
  StreamResult r = run_stream(store, cfg, m, exe_policy());
  std::filesystem::path trace_path = tmp.path() / "c9.trace.json";
  write_trace_events(r.whole_window, trace_path);

  std::ifstream in(trace_path);
  nlohmann::json parsed;
  bool parse_ok = true;
  try {
    in >> parsed;
  } catch (const nlohmann::json::exception&) {
    parse_ok = false;
  }
  c.expect(parse_ok, "trace file parses as JSON");
  c.expect(parsed.is_array(), "trace file is a JSON array");
  std::size_t complete = 0;
  for (const auto& e : parsed) {
    if (!e.contains("ph")) {
      c.expect(false, "event missing ph");
      break;
    }
    if (e.at("ph") == "X") {
      ++complete;
      bool shape = e.contains("name") && e.contains("ts") && e.contains("dur") &&
                   e.contains("pid") && e.contains("tid") &&
                   e.at("ts").is_number() && e.at("dur").is_number() &&
                   e.at("ts").get<double>() >= 0 && e.at("dur").get<double>() >= 0;
      if (!shape) {
        c.expect(false, "complete event shape");
        break;
      }
    }
  }
  c.expect(complete > 0, "trace contains complete events");

  // Roundtrip property over randomized snapshots.
  std::mt19937_64 rng(99);
  int failures = 0;
  for (int i = 0; i < 100; ++i) {
    RecordStore rs;
    auto ops = iotrace::testing::random_ops(rng(), 200);
    iotrace::testing::apply_ops(rs, ops);
    Snapshot snap = rs.snapshot();
    LogHeader h;
    h.hostname = "accept";
    h.pid = 1;
    h.run_id = "rt";
    h.t_snap_wall = snap.t_wall;
    h.t_snap_mono = snap.t_mono;
    std::ostringstream out;
    write_log(snap, h, out);
    std::istringstream back(out.str());
    LoadedLog loaded = load_log(back);
    if (!same_records(snap, loaded.snapshot)) ++failures;
  }
  c.expect_eq(failures, 0, "100 randomized write/load round trips");
  return c;
}

// 10. Concurrency: 16 threads x 1,000 reads x 4 KiB on disjoint files,
//     exact totals, repeated 20x.
Check criterion10(const TempDir&) {
  Check c;
  constexpr int kThreads = 16;
  constexpr int kReads = 1000;
  constexpr std::uint64_t kBytes = 4096;
  for (int rep = 0; rep < 20; ++rep) {
    RecordStore store;
    for (int t = 0; t < kThreads; ++t)
      store.on_open("/c10/file" + std::to_string(t), 100 + t, 1.0,
                    Family::kPosix);
    std::vector<std::thread> threads;
    for (int t = 0; t < kThreads; ++t)
      threads.emplace_back([&store, t] {
        for (int i = 0; i < kReads; ++i)
          store.on_read(100 + t, std::nullopt, kBytes, 1.0, 1.1);
      });
    for (auto& th : threads) th.join();
    Snapshot snap = store.snapshot();
    std::uint64_t reads = 0, bytes = 0;
    for (const auto& [id, rec] : snap.records) {
      reads += rec->counters.reads;
      bytes += rec->counters.bytes_read;
    }
    if (reads != std::uint64_t{kThreads} * kReads ||
        bytes != std::uint64_t{kThreads} * kReads * kBytes) {
      c.expect(false, "rep " + std::to_string(rep) + ": lost updates (reads " +
                          std::to_string(reads) + ", bytes " +
                          std::to_string(bytes) + ")");
      break;
    }
  }
  c.expect(c.ok, "aggregate reads = 16,000 and bytes = 65,536,000, 20 reps");
  return c;
}

}  // namespace

int main() {
  struct Criterion {
    int number;
    const char* name;
    std::function<Check(const TempDir&)> fn;
  };
  const Criterion criteria[] = {
      {1, "exact accounting vs oracle (1,000 x 64 KiB STREAM, < 60 s)", criterion1},
      {2, "windowed bandwidth (20 windows partition exactly, bw within 5%)",
       criterion2},
      {3, "zero-read signature (reads/open 2.0, frac_zero 0.50, diagnostic)",
       criterion3},
      {4, "segmented reads (modal bucket (100K,1M], zero frac 0.20, seq 1.0)",
       criterion4},
      {5, "checkpoint capture (stdio_writes = 1,400)", criterion5},
      {6, "staging plan (4,420 files, 7.7% bytes, 40.7% files)", criterion6},
      {7, "overhead (whole-run <= 25%, periodic <= whole-run)", criterion7},
      {8, "interposition correctness (bit-identical restore, exact counts)",
       criterion8},
      {9, "export validity (trace JSON array, 100 log round trips)", criterion9},
      {10, "concurrency (16 x 1,000 x 4 KiB exact, 20 reps)", criterion10},
  };

  int failures = 0;
  for (const auto& criterion : criteria) {
    TempDir tmp;
    Check result;
    try {
      result = criterion.fn(tmp);
    } catch (const std::exception& e) {
      result.ok = false;
      result.detail << "    exception: " << e.what() << "\n";
    }
    std::printf("[%s] criterion %2d: %s\n", result.ok ? "PASS" : "FAIL",
                criterion.number, criterion.name);
    if (!result.ok) {
      std::fputs(result.detail.str().c_str(), stdout);
      ++failures;
    }
  }
  if (failures == 0) {
    std::printf("all %zu acceptance criteria passed\n", std::size(criteria));
    return 0;
  }
  std::printf("%d acceptance criteria FAILED\n", failures);
  return 1;
}
