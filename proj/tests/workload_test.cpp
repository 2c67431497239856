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

#include "iotrace/workload.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>

#include "iotrace/errors.hpp"
#include "iotrace/export.hpp"
#include "iotrace/hash.hpp"
#include "test_util.hpp"

namespace iotrace {
namespace {

using testing::cli_bin;
using testing::fixture_bin;
using testing::preload_lib;
using testing::run_command;
using testing::TempDir;
using testing::write_bytes;

AttachmentPolicy exe_policy() {
  AttachmentPolicy p;
  p.kind = AttachmentPolicy::Kind::kRuntime;
  p.scan.object_filter = {"[exe]"};
  return p;
}

TEST(MakeDataset, FixedModelTotals) {
  TempDir tmp;
  DatasetSpec spec;
  spec.model = DatasetSpec::SizeModel::kFixed;
  spec.file_count = 100;
  spec.fixed_size = 1024;
  Manifest m = make_dataset(spec, tmp.path() / "ds");
  ASSERT_EQ(m.size(), 100u);
  std::uint64_t total = 0;
  for (const auto& e : m) {
    total += e.size;
    EXPECT_EQ(std::filesystem::file_size(e.path), e.size);
  }
  EXPECT_EQ(total, 102'400u);
  EXPECT_TRUE(std::filesystem::exists(tmp.path() / "ds" / "manifest.tsv"));
}

TEST(MakeDataset, DeterministicUnderSeed) {
  TempDir tmp;
  DatasetSpec spec;
  spec.model = DatasetSpec::SizeModel::kLognormal;
  spec.file_count = 50;
  spec.median_bytes = 2000;
  spec.sigma = 0.6;
  spec.seed = 42;
  Manifest a = make_dataset(spec, tmp.path() / "a");
  Manifest b = make_dataset(spec, tmp.path() / "b");
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].size, b[i].size);
}

TEST(MakeDataset, LognormalSampleMedianNearModelMedian) {
  TempDir tmp;
  DatasetSpec spec;
  spec.model = DatasetSpec::SizeModel::kLognormal;
  spec.file_count = 12'800;
  spec.median_bytes = 8'800;
  spec.sigma = 0.5;
  spec.seed = 7;
  Manifest m = make_dataset(spec, tmp.path() / "ds");
  std::vector<std::uint64_t> sizes;
  for (const auto& e : m) sizes.push_back(e.size);
  std::nth_element(sizes.begin(), sizes.begin() + sizes.size() / 2, sizes.end());
  double median = static_cast<double>(sizes[sizes.size() / 2]);
  EXPECT_NEAR(median, 8'800.0, 8'800.0 * 0.05);
}

TEST(MakeDataset, ManifestModelScalesOnDiskOnly) {
  TempDir tmp;
  Manifest nominal{{"a", 1'000'000}, {"b", 2'000'000}};
  save_manifest(nominal, tmp.path() / "src.tsv");
  DatasetSpec spec;
  spec.model = DatasetSpec::SizeModel::kManifest;
  spec.manifest_path = tmp.path() / "src.tsv";
  spec.on_disk_scale = 0.001;
  Manifest m = make_dataset(spec, tmp.path() / "ds");
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(m[0].size, 1'000'000u);  // manifest keeps nominal sizes
  EXPECT_EQ(std::filesystem::file_size(m[0].path), 1000u);  // disk scaled
}

TEST(Manifest, SaveLoadRoundTrip) {
  TempDir tmp;
  Manifest m{{"/a/b", 123}, {"/c d/e", 0}, {"rel.bin", 99}};
  save_manifest(m, tmp.path() / "m.tsv");
  EXPECT_EQ(load_manifest(tmp.path() / "m.tsv"), m);
}

Manifest tiny_dataset(const TempDir& tmp, int files, std::uint64_t size,
                      std::uint64_t seed = 1) {
  DatasetSpec spec;
  spec.model = DatasetSpec::SizeModel::kFixed;
  spec.file_count = files;
  spec.fixed_size = size;
  spec.seed = seed;
  return make_dataset(spec, tmp.path() / "ds");
}

TEST(Stream, OracleShowsChunkReadsPlusZeroRead) {
  TempDir tmp;
  Manifest m = tiny_dataset(tmp, 1, 3 * 1024);
  WorkloadConfig cfg;
  cfg.dataset_dir = tmp.path() / "ds";
  cfg.batch_size = 1;
  cfg.steps = 1;
  cfg.threads = 1;
  cfg.chunk_size = 1024;
  RecordStore store;
  StreamResult r = run_stream(store, cfg, m, AttachmentPolicy{});
  EXPECT_EQ(r.oracle.total_reads(), 4u);  // 3 data chunks + zero read
  EXPECT_EQ(r.oracle.total_bytes_read(), 3 * 1024u);
  EXPECT_EQ(r.oracle.total_opens(), 1u);
}

TEST(Stream, ZeroReadEmulationOff) {
  TempDir tmp;
  Manifest m = tiny_dataset(tmp, 1, 3 * 1024);
  WorkloadConfig cfg;
  cfg.dataset_dir = tmp.path() / "ds";
  cfg.batch_size = 1;
  cfg.steps = 1;
  cfg.threads = 1;
  cfg.chunk_size = 1024;
  cfg.emulate_trailing_zero_read = false;
  RecordStore store;
  StreamResult r = run_stream(store, cfg, m, AttachmentPolicy{});
  EXPECT_EQ(r.oracle.total_reads(), 3u);
}

TEST(Stream, TableThreeImageNetConfigConsumesAllFiles) {
  TempDir tmp;
  Manifest m = tiny_dataset(tmp, 128, 16);
  WorkloadConfig cfg;
  cfg.dataset_dir = tmp.path() / "ds";
  cfg.batch_size = 128;
  cfg.steps = 100;
  cfg.threads = 4;
  cfg.prefetch_depth = 10;
  cfg.chunk_size = 1024;
  RecordStore store;
  StreamResult r = run_stream(store, cfg, m, AttachmentPolicy{});
  EXPECT_EQ(r.files_consumed, 12'800u);
  EXPECT_EQ(r.oracle.total_opens(), 12'800u);
}

TEST(Stream, ProfilerMatchesOracleExactly) {
  TempDir tmp;
  Manifest m = tiny_dataset(tmp, 40, 8 * 1024);
  WorkloadConfig cfg;
  cfg.dataset_dir = tmp.path() / "ds";
  cfg.batch_size = 8;
  cfg.steps = 5;
  cfg.threads = 3;
  cfg.chunk_size = 4096;
  RecordStore store;
  StreamResult r = run_stream(store, cfg, m, exe_policy());
  EXPECT_EQ(r.whole.totals.opens, r.oracle.total_opens());
  EXPECT_EQ(r.whole.totals.reads, r.oracle.total_reads());
  EXPECT_EQ(r.whole.totals.bytes_read, r.oracle.total_bytes_read());
  EXPECT_EQ(r.whole.totals.opens, 40u);
  EXPECT_EQ(r.whole.totals.reads, 40u * 3u);  // 2 chunks + zero read per file
}

TEST(Stream, ThreadCountDoesNotChangeCounts) {
  TempDir tmp;
  Manifest m = tiny_dataset(tmp, 64, 2048);
  auto run_with_threads = [&](int threads) {
    WorkloadConfig cfg;
    cfg.dataset_dir = tmp.path() / "ds";
    cfg.batch_size = 16;
    cfg.steps = 4;
    cfg.threads = threads;
    cfg.chunk_size = 4096;
    RecordStore store;
    StreamResult r = run_stream(store, cfg, m, exe_policy());
    return std::tuple(r.whole.totals.opens, r.whole.totals.reads,
                      r.whole.totals.bytes_read);
  };
  EXPECT_EQ(run_with_threads(1), run_with_threads(8));
}

TEST(Stream, PrefetchQueueNeverExceedsDepth) {
  TempDir tmp;
  Manifest m = tiny_dataset(tmp, 32, 512);
  WorkloadConfig cfg;
  cfg.dataset_dir = tmp.path() / "ds";
  cfg.batch_size = 2;
  cfg.steps = 64;
  cfg.threads = 4;
  cfg.prefetch_depth = 3;
  cfg.compute_time_s = 0.0005;  // let readers run ahead into the bound
  RecordStore store;
  StreamResult r = run_stream(store, cfg, m, AttachmentPolicy{});
  EXPECT_LE(r.prefetch_peak, 3u);
  EXPECT_GE(r.prefetch_peak, 1u);
}

TEST(Stream, DeterministicOracleWithOneThread) {
  TempDir tmp;
  Manifest m = tiny_dataset(tmp, 16, 1024);
  auto run_once = [&] {
    WorkloadConfig cfg;
    cfg.dataset_dir = tmp.path() / "ds";
    cfg.batch_size = 4;
    cfg.steps = 4;
    cfg.threads = 1;
    cfg.seed = 5;
    cfg.shuffle = true;
    RecordStore store;
    return run_stream(store, cfg, m, AttachmentPolicy{});
  };
  StreamResult a = run_once();
  StreamResult b = run_once();
  ASSERT_EQ(a.oracle.entries.size(), b.oracle.entries.size());
  for (std::size_t i = 0; i < a.oracle.entries.size(); ++i) {
    EXPECT_EQ(static_cast<int>(a.oracle.entries[i].kind),
              static_cast<int>(b.oracle.entries[i].kind));
    EXPECT_EQ(a.oracle.entries[i].path_index, b.oracle.entries[i].path_index);
    EXPECT_EQ(a.oracle.entries[i].offset, b.oracle.entries[i].offset);
    EXPECT_EQ(a.oracle.entries[i].length, b.oracle.entries[i].length);
  }
}

TEST(Stream, WindowsPartitionTheRun) {
  TempDir tmp;
  Manifest m = tiny_dataset(tmp, 100, 4096);
  WorkloadConfig cfg;
  cfg.dataset_dir = tmp.path() / "ds";
  cfg.batch_size = 10;
  cfg.steps = 100;
  cfg.threads = 2;
  cfg.window_every_steps = 5;
  RecordStore store;
  StreamResult r = run_stream(store, cfg, m, exe_policy());
  EXPECT_EQ(r.windows.size(), 20u);
  std::uint64_t sum = 0;
  for (const auto& w : r.windows) sum += w.totals.bytes_read;
  EXPECT_EQ(sum, r.whole.totals.bytes_read);
}

TEST(Stream, MissingDatasetThrows) {
  Manifest m{{"/definitely/not/here.bin", 100}};
  WorkloadConfig cfg;
  RecordStore store;
  EXPECT_THROW(run_stream(store, cfg, m, AttachmentPolicy{}), DatasetMissing);
  Manifest empty;
  EXPECT_THROW(run_stream(store, cfg, empty, AttachmentPolicy{}), DatasetMissing);
}

TEST(Checkpoint, TenTimes140BufferedWrites) {
  TempDir tmp;
  RecordStore store;
  CheckpointResult r = run_checkpoint_emulation(store, tmp.path() / "ck", 10, 140,
                                                4096, exe_policy());
  EXPECT_EQ(r.expected_stdio_writes, 1400u);
  EXPECT_EQ(r.whole.totals.stdio_writes, 1400u);
  EXPECT_EQ(r.whole.totals.stdio_bytes_written, 1400u * 4096u);
}

TEST(Checkpoint, ZeroCheckpoints) {
  TempDir tmp;
  RecordStore store;
  CheckpointResult r =
      run_checkpoint_emulation(store, tmp.path() / "ck", 0, 140, 4096, exe_policy());
  EXPECT_EQ(r.whole.totals.stdio_writes, 0u);
  EXPECT_EQ(r.whole.totals.stdio_opens, 0u);
}

TEST(Checkpoint, SingleWrite) {
  TempDir tmp;
  RecordStore store;
  CheckpointResult r =
      run_checkpoint_emulation(store, tmp.path() / "ck", 1, 1, 4096, exe_policy());
  EXPECT_EQ(r.whole.totals.stdio_writes, 1u);
  EXPECT_EQ(r.whole.totals.stdio_bytes_written, 4096u);
}

TEST(OracleLogIo, RoundTripAndTruncationDetection) {
  TempDir tmp;
  OracleLog log;
  log.run_id = "feed1234";
  log.paths = {"/a", "/b"};
  log.entries.push_back({OracleEntry::Kind::kOpen, 0, 0, 0, 0, 1.0, 1.1});
  log.entries.push_back({OracleEntry::Kind::kRead, 0, 0, 0, 512, 1.2, 1.3});
  log.entries.push_back({OracleEntry::Kind::kClose, 0, 0, 0, 0, 1.4, 1.5});
  log.save(tmp.path() / "oracle.ndjson");

  OracleLog loaded = OracleLog::load(tmp.path() / "oracle.ndjson");
  EXPECT_EQ(loaded.run_id, log.run_id);
  EXPECT_EQ(loaded.entries.size(), 3u);
  EXPECT_EQ(loaded.total_bytes_read(), 512u);

  // Truncate: drop the last line (the end marker).
  std::ifstream in(tmp.path() / "oracle.ndjson");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  in.close();
  std::ofstream out(tmp.path() / "truncated.ndjson");
  for (std::size_t i = 0; i + 1 < lines.size(); ++i) out << lines[i] << '\n';
  out.close();
  EXPECT_THROW(OracleLog::load(tmp.path() / "truncated.ndjson"), MismatchedRun);
}

StreamResult validated_run(const TempDir& tmp, Manifest& m_out) {
  m_out = tiny_dataset(tmp, 50, 8192);
  WorkloadConfig cfg;
  cfg.dataset_dir = tmp.path() / "ds";
  cfg.batch_size = 5;
  cfg.steps = 10;
  cfg.threads = 3;
  cfg.window_every_steps = 2;
  cfg.sync_windows = true;
  RecordStore store;
  return run_stream(store, cfg, m_out, exe_policy());
}

RunArtifacts artifacts_of(const StreamResult& r) {
  RunArtifacts a;
  a.run_id = r.run_id;
  for (const auto& w : r.windows) a.windows.push_back(window_row(w));
  a.whole = window_row(r.whole);
  return a;
}

TEST(Validate, CleanRunPassesWithZeroByteError) {
  TempDir tmp;
  Manifest m;
  StreamResult r = validated_run(tmp, m);
  ValidationReport report = validate_run(artifacts_of(r), r.oracle, 0.05);
  EXPECT_TRUE(report.pass) << report.detail;
  for (const auto& v : report.windows) {
    EXPECT_TRUE(v.bytes_exact) << "window " << v.window_id;
    EXPECT_EQ(v.profiler_bytes, v.oracle_bytes);
  }
}

TEST(Validate, MismatchedRunIdThrows) {
  TempDir tmp;
  Manifest m;
  StreamResult r = validated_run(tmp, m);
  RunArtifacts a = artifacts_of(r);
  a.run_id = "someotherrun";
  EXPECT_THROW(validate_run(a, r.oracle, 0.05), MismatchedRun);
}

TEST(Validate, DoubledOracleBytesFails) {
  TempDir tmp;
  Manifest m;
  StreamResult r = validated_run(tmp, m);
  OracleLog doctored = r.oracle;
  for (auto& e : doctored.entries)
    if (e.kind == OracleEntry::Kind::kRead) e.length *= 2;
  ValidationReport report = validate_run(artifacts_of(r), doctored, 0.05);
  EXPECT_FALSE(report.pass);
  EXPECT_FALSE(report.detail.empty());
}

TEST(RunArtifactsIo, RoundTrip) {
  TempDir tmp;
  RunArtifacts a;
  a.run_id = "r1";
  WindowRow row;
  row.window_id = 1;
  row.t_start_mono = 1.5;
  row.t_stop_mono = 2.5;
  row.opens = 10;
  row.reads = 20;
  row.bytes_read = 1 << 20;
  row.bandwidth_read = 1048576.0;
  a.windows.push_back(row);
  a.whole = row;
  a.whole.window_id = 0;
  save_run_artifacts(a, tmp.path() / "w.json");
  RunArtifacts b = load_run_artifacts(tmp.path() / "w.json");
  EXPECT_EQ(b.run_id, "r1");
  ASSERT_EQ(b.windows.size(), 1u);
  EXPECT_EQ(b.windows[0].bytes_read, static_cast<std::uint64_t>(1) << 20);
  EXPECT_EQ(b.whole.window_id, 0u);
}

// ---------------------------------------------------------------------------
// CLI end-to-end

TEST(Cli, MkdatasetStreamValidateRoundTrip) {
  TempDir tmp;
  std::string ds = (tmp.path() / "ds").string();
  std::string prefix = (tmp.path() / "run").string();

  auto mk = run_command(cli_bin().string() + " mkdataset --dir " + ds +
                        " --files 30 --model fixed --size 4096");
  ASSERT_EQ(mk.exit_code, 0) << mk.output;

  auto st = run_command(cli_bin().string() + " stream --dataset " + ds +
                        " --batch-size 3 --steps 10 --threads 2 "
                        "--window-every-steps 5 --out-prefix " + prefix);
  ASSERT_EQ(st.exit_code, 0) << st.output;

  auto val = run_command(cli_bin().string() + " validate --windows " + prefix +
                         ".windows.json --oracle " + prefix + ".oracle.ndjson");
  EXPECT_EQ(val.exit_code, 0) << val.output;
  EXPECT_NE(val.output.find("PASS"), std::string::npos);

  auto rep = run_command(cli_bin().string() + " report --log " + prefix +
                         ".iotrace.ndjson");
  EXPECT_EQ(rep.exit_code, 0) << rep.output;
  EXPECT_NE(rep.output.find("POSIX bandwidth"), std::string::npos);
}

TEST(Cli, RunTrueProducesEmptyValidReport) {
  TempDir tmp;
  std::string prefix = (tmp.path() / "t").string();
  setenv("IOTRACE_PRELOAD_LIB", preload_lib().c_str(), 1);
  auto r = run_command(cli_bin().string() + " run --out-prefix " + prefix +
                       " -- /bin/true");
  unsetenv("IOTRACE_PRELOAD_LIB");
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_NE(r.output.find("POSIX bandwidth"), std::string::npos);
  LoadedLog log = load_log(prefix + ".iotrace.ndjson");
  // /bin/true does no catalogued I/O of its own
  for (const auto& [id, rec] : log.snapshot.records)
    EXPECT_EQ(rec->counters.bytes_read, 0u) << rec->path;
}

TEST(Cli, RunFixtureFullCounterEquality) {
  TempDir tmp;
  write_bytes(tmp.path() / "f.bin", 2048);
  std::string file = (tmp.path() / "f.bin").string();
  std::string prefix = (tmp.path() / "r").string();
  setenv("IOTRACE_PRELOAD_LIB", preload_lib().c_str(), 1);
  auto r = run_command(cli_bin().string() + " run --out-prefix " + prefix +
                       " -- " + fixture_bin().string() + " simple " + file + " 4");
  unsetenv("IOTRACE_PRELOAD_LIB");
  ASSERT_EQ(r.exit_code, 0) << r.output;
  LoadedLog log = load_log(prefix + ".iotrace.ndjson");
  const FileRecord* rec = log.snapshot.find_path(canonical_path(file));
  ASSERT_NE(rec, nullptr);
  EXPECT_EQ(rec->counters.opens, 4u);
  EXPECT_EQ(rec->counters.reads, 4u);
  EXPECT_EQ(rec->counters.closes, 4u);
  EXPECT_EQ(rec->counters.bytes_read, 4u * 2048u);
}

TEST(Cli, AdvisePaperShapedManifest) {
  TempDir tmp;
  Manifest m = testing::paper_shaped_manifest();
  save_manifest(m, tmp.path() / "m.tsv");
  auto r = run_command(cli_bin().string() + " advise --manifest " +
                       (tmp.path() / "m.tsv").string() + " --threshold 2000000");
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_NE(r.output.find("stage 4420 of 10868 files"), std::string::npos);
}

TEST(Cli, AdviseThresholdZeroEmptyPlan) {
  TempDir tmp;
  Manifest m{{"a", 100}};
  save_manifest(m, tmp.path() / "m.tsv");
  auto r = run_command(cli_bin().string() + " advise --manifest " +
                       (tmp.path() / "m.tsv").string() + " --threshold 0");
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_NE(r.output.find("empty"), std::string::npos);
}

TEST(Cli, UsageErrorsExitThree) {
  auto r = run_command(cli_bin().string() + " stream");  // missing --dataset
  EXPECT_EQ(r.exit_code, 3);
  auto r2 = run_command(cli_bin().string() + " no-such-command");
  EXPECT_EQ(r2.exit_code, 3);
}

TEST(Cli, CheckpointSubcommand) {
  TempDir tmp;
  auto r = run_command(cli_bin().string() + " checkpoint --dir " +
                       (tmp.path() / "ck").string() +
                       " --checkpoints 10 --writes-per 140 --bytes 4096");
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_NE(r.output.find("stdio_writes 1400 (expected 1400)"), std::string::npos);
}

}  // namespace
}  // namespace iotrace
