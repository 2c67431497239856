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

#include <elf.h>
#include <fcntl.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "iotrace/analysis.hpp"
#include "iotrace/clock.hpp"
#include "iotrace/collector.hpp"
#include "iotrace/errors.hpp"
#include "iotrace/export.hpp"
#include "iotrace/hooks.hpp"
#include "iotrace/session.hpp"
#include "iotrace/workload.hpp"

namespace fs = std::filesystem;
using namespace iotrace;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidationFail = 2;
constexpr int kExitUsage = 3;

AttachmentPolicy exe_attach_policy() {
  AttachmentPolicy policy;
  policy.kind = AttachmentPolicy::Kind::kRuntime;
  policy.scan.object_filter = {"[exe]"};
  return policy;
}

Manifest manifest_for_dataset(const fs::path& dataset_dir) {
  fs::path manifest = dataset_dir / "manifest.tsv";
  if (!fs::exists(manifest))
    throw DatasetMissing("no manifest.tsv under " + dataset_dir.string() +
                         " (run mkdataset first)");
  return load_manifest(manifest);
}

LogHeader header_for(const Snapshot& snap, const std::string& run_id,
                     double t_start_wall, double t_start_mono) {
  LogHeader h;
  h.hostname = hostname();
  h.pid = getpid();
  h.run_id = run_id;
  h.t_start_wall = t_start_wall;
  h.t_start_mono = t_start_mono;
  h.t_snap_wall = snap.t_wall;
  h.t_snap_mono = snap.t_mono;
  return h;
}

void write_reports(const ReportBundle& bundle, const std::string& prefix) {
  hooks::SuppressionGuard guard;
  {
    std::ofstream txt(prefix + ".report.txt");
    txt << render_report(bundle, ReportFormat::kText);
  }
  {
    std::ofstream js(prefix + ".report.json");
    js << render_report(bundle, ReportFormat::kJson);
  }
}

/// Best-effort: does the ELF at `path` carry a PT_INTERP header?
bool looks_dynamically_linked(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return true;  // cannot tell; do not warn
  unsigned char ident[EI_NIDENT] = {0};
  in.read(reinterpret_cast<char*>(ident), sizeof(ident));
  if (!in || std::memcmp(ident, ELFMAG, SELFMAG) != 0) return true;
  if (ident[EI_CLASS] != ELFCLASS64) return true;
  Elf64_Ehdr ehdr{};
  in.seekg(0);
  in.read(reinterpret_cast<char*>(&ehdr), sizeof(ehdr));
  if (!in) return true;
  for (int i = 0; i < ehdr.e_phnum; ++i) {
    Elf64_Phdr phdr{};
    in.seekg(static_cast<std::streamoff>(ehdr.e_phoff + i * ehdr.e_phentsize));
    in.read(reinterpret_cast<char*>(&phdr), sizeof(phdr));
    if (!in) return true;
    if (phdr.p_type == PT_INTERP) return true;
  }
  return false;
}

fs::path preload_library_path() {
  if (const char* env = std::getenv("IOTRACE_PRELOAD_LIB")) return env;
  char buf[4096];
  ssize_t n = readlink("/proc/self/exe", buf, sizeof(buf) - 1);
  if (n > 0) {
    buf[n] = '\0';
    fs::path exe_dir = fs::path(buf).parent_path();
    for (const fs::path& c : {exe_dir / "libiotrace_preload.so",
                              exe_dir / ".." / "lib" / "libiotrace_preload.so"})
      if (fs::exists(c)) return fs::weakly_canonical(c);
  }
  return "libiotrace_preload.so";
}

struct StreamFlags {
  std::string dataset;
  std::string out_prefix = "iotrace-run";
  std::uint64_t batch_size = 128;
  std::uint64_t steps = 100;
  std::uint64_t threads = 16;
  std::uint64_t prefetch = 10;
  std::uint64_t chunk_size = 1 << 20;
  std::uint64_t window_every = 0;
  std::uint64_t seed = 1;
  std::string dxt = "on";
  std::string zero_read = "on";
  std::string sync_windows = "on";
  std::string attach = "got";
  bool shuffle = false;
  double compute_time = 0;
  std::optional<std::uint64_t> checkpoint_every;
  std::uint64_t writes_per_checkpoint = 140;
  std::uint64_t bytes_per_write = 4096;
};

WorkloadConfig to_config(const StreamFlags& f) {
  WorkloadConfig cfg;
  cfg.dataset_dir = f.dataset;
  cfg.batch_size = f.batch_size;
  cfg.steps = f.steps;
  cfg.threads = f.threads;
  cfg.prefetch_depth = f.prefetch;
  cfg.chunk_size = f.chunk_size;
  cfg.window_every_steps = f.window_every;
  cfg.seed = f.seed;
  cfg.emulate_trailing_zero_read = f.zero_read != "off";
  cfg.sync_windows = f.sync_windows != "off";
  cfg.shuffle = f.shuffle;
  cfg.compute_time_s = f.compute_time;
  cfg.checkpoint_every = f.checkpoint_every;
  cfg.writes_per_checkpoint = f.writes_per_checkpoint;
  cfg.bytes_per_write = f.bytes_per_write;
  return cfg;
}

int cmd_stream(const StreamFlags& f) {
  Manifest manifest = manifest_for_dataset(f.dataset);
  WorkloadConfig cfg = to_config(f);

  StoreConfig sc;
  sc.dxt_enabled = f.dxt != "off";
  RecordStore store(sc);

  AttachmentPolicy policy =
      f.attach == "none" ? AttachmentPolicy{} : exe_attach_policy();
  StreamResult r = run_stream(store, cfg, manifest, policy);

  r.oracle.save(f.out_prefix + ".oracle.ndjson");

  RunArtifacts artifacts;
  artifacts.run_id = r.run_id;
  for (const auto& w : r.windows) artifacts.windows.push_back(window_row(w));
  artifacts.whole = window_row(r.whole);
  save_run_artifacts(artifacts, f.out_prefix + ".windows.json");

  write_log(r.whole_window.stop,
            header_for(r.whole_window.stop, r.run_id,
                       r.whole_window.start.t_wall, r.whole_window.start.t_mono),
            fs::path(f.out_prefix + ".iotrace.ndjson"));

  if (sc.dxt_enabled) {
    try {
      write_trace_events(r.whole_window, f.out_prefix + ".trace.json");
    } catch (const NoSegments&) {
      std::cerr << "iotrace: no trace segments recorded; skipping trace file\n";
    }
  }

  ReportOptions opts;
  opts.manifest = manifest;
  opts.series_windows = r.windows;
  opts.run_id = r.run_id;
  ReportBundle bundle = build_report(r.whole, r.whole_window.stop, opts);
  write_reports(bundle, f.out_prefix);

  std::cout << "run " << r.run_id << ": " << r.files_consumed << " files, "
            << r.steps_done << " steps, " << r.windows.size() << " windows, "
            << r.whole.totals.bytes_read << " bytes read in "
            << r.whole.elapsed << " s ("
            << r.whole.bandwidth_read / 1e6 << " MB/s)\n";
  std::cout << "prefetch peak " << r.prefetch_peak << " batches\n";
  std::cout << "artifacts: " << f.out_prefix << ".{oracle.ndjson,windows.json,"
            << "iotrace.ndjson,trace.json,report.txt,report.json}\n";
  return kExitOk;
}

int cmd_mkdataset(const DatasetSpec& spec, const std::string& out_dir) {
  Manifest m = make_dataset(spec, out_dir);
  std::uint64_t total = 0;
  for (const auto& e : m) total += e.size;
  std::cout << "wrote " << m.size() << " files, " << total
            << " manifest bytes under " << out_dir << "\n";
  return kExitOk;
}

int cmd_checkpoint(const std::string& dir, const std::string& out_prefix,
                   std::uint64_t checkpoints, std::uint64_t writes_per,
                   std::uint64_t bytes_per_write) {
  RecordStore store(StoreConfig{});
  CheckpointResult r = run_checkpoint_emulation(
      store, dir, checkpoints, writes_per, bytes_per_write, exe_attach_policy());
  std::cout << "stdio_writes " << r.whole.totals.stdio_writes << " (expected "
            << r.expected_stdio_writes << "), stdio bytes "
            << r.whole.totals.stdio_bytes_written << " (expected "
            << r.expected_bytes << ")\n";
  if (!out_prefix.empty()) {
    Snapshot snap = store.snapshot();
    write_log(snap,
              header_for(snap, make_run_id(0), r.whole.t_start_wall,
                         r.whole.t_start_mono),
              fs::path(out_prefix + ".iotrace.ndjson"));
  }
  return r.whole.totals.stdio_writes == r.expected_stdio_writes
             ? kExitOk
             : kExitValidationFail;
}

int cmd_run(const std::vector<std::string>& target, const std::string& out_prefix,
            const std::string& dxt, const std::string& format) {
  if (target.empty()) throw CLI::ValidationError("run", "no target command given");

  fs::path lib = preload_library_path();
  if (!fs::exists(lib))
    throw LaunchFailure("preload library not found at " + lib.string());
  if (!looks_dynamically_linked(target[0]))
    std::cerr << "iotrace: warning: " << target[0]
              << " looks statically linked; nothing will be captured\n";

  pid_t pid = fork();
  if (pid < 0) throw LaunchFailure("fork failed");
  if (pid == 0) {
    setenv("LD_PRELOAD", lib.c_str(), 1);
    setenv("IOTRACE_OUT", out_prefix.c_str(), 1);
    setenv("IOTRACE_ENABLE", "1", 1);
    setenv("IOTRACE_DXT", dxt == "off" ? "0" : "1", 1);
    std::vector<char*> argv;
    for (const auto& a : target) argv.push_back(const_cast<char*>(a.c_str()));
    argv.push_back(nullptr);
    execvp(argv[0], argv.data());
    std::fprintf(stderr, "iotrace: exec %s failed: %s\n", argv[0],
                 std::strerror(errno));
    _exit(127);
  }
  int status = 0;
  if (waitpid(pid, &status, 0) < 0) throw LaunchFailure("waitpid failed");
  if (WIFEXITED(status) && WEXITSTATUS(status) == 127)
    throw LaunchFailure("target failed to launch");

  fs::path log_path = out_prefix + ".iotrace.ndjson";
  if (!fs::exists(log_path)) {
    std::cerr << "iotrace: target wrote no profiler log (statically linked or "
                 "exited abnormally)\n";
    return kExitValidationFail;
  }
  LoadedLog log = load_log(log_path);
  Snapshot start;
  start.t_wall = log.header.t_start_wall;
  start.t_mono = log.header.t_start_mono;
  WindowStats whole = diff(start, log.snapshot, 0);
  ReportOptions opts;
  opts.run_id = log.header.run_id;
  ReportBundle bundle = build_report(whole, log.snapshot, opts);
  write_reports(bundle, out_prefix);
  std::cout << render_report(bundle, format == "json" ? ReportFormat::kJson
                                                      : ReportFormat::kText);
  if (WIFEXITED(status) && WEXITSTATUS(status) != 0)
    std::cerr << "iotrace: note: target exited with status "
              << WEXITSTATUS(status) << "\n";
  return kExitOk;
}

int cmd_validate(const std::string& windows_path, const std::string& oracle_path,
                 double tolerance) {
  RunArtifacts artifacts = load_run_artifacts(windows_path);
  OracleLog oracle = OracleLog::load(oracle_path);
  ValidationReport report = validate_run(artifacts, oracle, tolerance);
  for (const auto& v : report.windows) {
    std::printf("window %3llu: bytes %llu/%llu %s, bw %.2f/%.2f MB/s %s\n",
                static_cast<unsigned long long>(v.window_id),
                static_cast<unsigned long long>(v.profiler_bytes),
                static_cast<unsigned long long>(v.oracle_bytes),
                v.bytes_exact ? "exact" : "MISMATCH", v.profiler_bw / 1e6,
                v.oracle_bw / 1e6, v.bandwidth_ok ? "ok" : "OUT-OF-TOLERANCE");
  }
  std::cout << (report.pass ? "PASS" : "FAIL") << "\n";
  if (!report.pass && !report.detail.empty()) std::cout << report.detail;
  return report.pass ? kExitOk : kExitValidationFail;
}

int cmd_overhead(const StreamFlags& f, int reps) {
  Manifest manifest = manifest_for_dataset(f.dataset);
  WorkloadConfig cfg = to_config(f);
  std::cout << "note: page cache is not dropped (no privileges assumed); runs "
               "are order-randomized with "
            << reps << " repetitions per mode and means reported\n";
  OverheadConfig oc;
  oc.repetitions = reps;
  oc.window_every_steps = f.window_every ? f.window_every : 5;
  oc.seed = f.seed;
  OverheadResult r = measure_overhead(cfg, manifest, oc);
  std::printf("profiling off      : %.6f s\n", r.t_off);
  std::printf("whole-run window   : %.6f s  (overhead %+.2f%%)\n", r.t_on_whole,
              r.ratio_whole * 100);
  std::printf("periodic windows   : %.6f s  (overhead %+.2f%%)\n",
              r.t_on_periodic, r.ratio_periodic * 100);
  return kExitOk;
}

int cmd_advise(const std::string& manifest_path, std::uint64_t threshold,
               std::optional<std::uint64_t> capacity,
               const std::string& movelist) {
  Manifest manifest = load_manifest(manifest_path);
  if (threshold == 0) {
    std::cout << "staging plan: empty (threshold 0)\n";
    return kExitOk;
  }
  StagingPlan plan = staging_advise(manifest, threshold, capacity);
  std::printf("stage %llu of %zu files, %llu bytes (%.1f%% of bytes, %.1f%% of "
              "files), threshold %llu B\n",
              static_cast<unsigned long long>(plan.staged_file_count),
              manifest.size(),
              static_cast<unsigned long long>(plan.staged_bytes),
              plan.frac_bytes * 100, plan.frac_files * 100,
              static_cast<unsigned long long>(plan.threshold));
  if (!movelist.empty()) {
    std::ofstream out(movelist);
    for (const auto& e : plan.files) out << e.path << '\t' << e.size << '\n';
    std::cout << "move list written to " << movelist << " (no files moved)\n";
  }
  return kExitOk;
}

int cmd_report(const std::string& log_path, const std::string& manifest_path,
               const std::string& format, const std::string& out_prefix) {
  LoadedLog log = load_log(log_path);
  Snapshot start;
  start.t_wall = log.header.t_start_wall;
  start.t_mono = log.header.t_start_mono;
  WindowStats whole = diff(start, log.snapshot, 0);
  ReportOptions opts;
  opts.run_id = log.header.run_id;
  if (!manifest_path.empty()) opts.manifest = load_manifest(manifest_path);
  ReportBundle bundle = build_report(whole, log.snapshot, opts);
  std::cout << render_report(bundle, format == "json" ? ReportFormat::kJson
                                                      : ReportFormat::kText);
  if (!out_prefix.empty()) write_reports(bundle, out_prefix);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"runtime-attachable I/O profiler and tracer for data-ingestion "
               "pipelines"};
  app.require_subcommand(1);

  // mkdataset
  auto* mk = app.add_subcommand("mkdataset", "generate a synthetic dataset");
  DatasetSpec spec;
  std::string mk_dir = "dataset";
  std::string mk_model = "fixed";
  mk->add_option("--dir", mk_dir, "output directory");
  mk->add_option("--files", spec.file_count, "number of files");
  mk->add_option("--model", mk_model, "fixed|lognormal|manifest");
  mk->add_option("--size", spec.fixed_size, "file size (fixed model)");
  mk->add_option("--median", spec.median_bytes, "median size (lognormal model)");
  mk->add_option("--sigma", spec.sigma, "lognormal sigma");
  mk->add_option("--manifest", spec.manifest_path, "source manifest (manifest model)");
  mk->add_option("--scale", spec.on_disk_scale,
                 "on-disk scale for manifest model (manifest keeps nominal sizes)");
  mk->add_option("--seed", spec.seed, "generator seed");

  // stream
  StreamFlags sf;
  auto* stream = app.add_subcommand(
      "stream", "ingestion benchmark: read files into batches, no compute");
  stream->add_option("--dataset", sf.dataset, "dataset directory")->required();
  stream->add_option("--out-prefix", sf.out_prefix, "artifact path prefix");
  stream->add_option("--batch-size", sf.batch_size, "files per batch");
  stream->add_option("--steps", sf.steps, "batches to consume");
  stream->add_option("--threads", sf.threads, "reader threads");
  stream->add_option("--prefetch", sf.prefetch, "prefetch queue depth (batches)");
  stream->add_option("--chunk-size", sf.chunk_size, "read chunk bytes");
  stream->add_option("--window-every-steps", sf.window_every,
                     "profiling window length in steps (0 = whole run)");
  stream->add_option("--seed", sf.seed, "seed");
  stream->add_option("--dxt", sf.dxt, "on|off per-operation tracing");
  stream->add_option("--zero-read", sf.zero_read,
                     "on|off trailing zero-length read emulation");
  stream->add_option("--sync-windows", sf.sync_windows,
                     "on|off quiesce readers at window boundaries");
  stream->add_option("--attach", sf.attach, "got|none interposition mode");
  stream->add_flag("--shuffle", sf.shuffle, "shuffle file order (seeded)");
  stream->add_option("--compute-time", sf.compute_time,
                     "pacing sleep per step, seconds");
  std::uint64_t ckpt_every = 0;
  stream->add_option("--checkpoint-every", ckpt_every,
                     "emulate a checkpoint every N steps (0 = never)");
  stream->add_option("--writes-per-checkpoint", sf.writes_per_checkpoint,
                     "buffered writes per checkpoint");
  stream->add_option("--bytes-per-write", sf.bytes_per_write,
                     "payload bytes per buffered write");

  // checkpoint
  auto* ckpt = app.add_subcommand("checkpoint", "emulate buffered checkpoint writes");
  std::string ck_dir = "checkpoints";
  std::string ck_prefix;
  std::uint64_t ck_n = 10, ck_writes = 140, ck_bytes = 4096;
  ckpt->add_option("--dir", ck_dir, "checkpoint directory");
  ckpt->add_option("--checkpoints", ck_n, "number of checkpoints");
  ckpt->add_option("--writes-per", ck_writes, "fwrite calls per checkpoint");
  ckpt->add_option("--bytes", ck_bytes, "bytes per fwrite");
  ckpt->add_option("--out-prefix", ck_prefix, "also write the profiler log");

  // run
  auto* run = app.add_subcommand("run", "profile a target under the preload library");
  std::string run_prefix = "iotrace-run";
  std::string run_dxt = "on";
  std::string run_format = "text";
  std::vector<std::string> run_target;
  run->add_option("--out-prefix", run_prefix, "artifact path prefix");
  run->add_option("--dxt", run_dxt, "on|off per-operation tracing");
  run->add_option("--format", run_format, "text|json report to stdout");
  run->add_option("target", run_target, "command and arguments")
      ->required()
      ->take_all();

  // validate
  auto* val = app.add_subcommand("validate", "compare a run against its oracle log");
  std::string val_windows, val_oracle;
  double val_tol = 0.05;
  val->add_option("--windows", val_windows, "windows.json from the run")->required();
  val->add_option("--oracle", val_oracle, "oracle.ndjson from the run")->required();
  val->add_option("--tolerance", val_tol, "relative bandwidth tolerance");

  // overhead
  StreamFlags of;
  of.threads = 2;
  of.batch_size = 10;
  of.steps = 100;
  int oh_reps = 5;
  auto* oh = app.add_subcommand("overhead", "measure profiling overhead");
  oh->add_option("--dataset", of.dataset, "dataset directory")->required();
  oh->add_option("--batch-size", of.batch_size, "files per batch");
  oh->add_option("--steps", of.steps, "batches to consume");
  oh->add_option("--threads", of.threads, "reader threads");
  oh->add_option("--prefetch", of.prefetch, "prefetch depth");
  oh->add_option("--chunk-size", of.chunk_size, "read chunk bytes");
  oh->add_option("--window-every-steps", of.window_every,
                 "periodic window length (default 5)");
  oh->add_option("--reps", oh_reps, "repetitions per mode");
  oh->add_option("--seed", of.seed, "seed");

  // advise
  auto* adv = app.add_subcommand("advise", "staging recommendation from a manifest");
  std::string adv_manifest, adv_movelist;
  std::uint64_t adv_threshold = 2'000'000;
  std::optional<std::uint64_t> adv_capacity;
  adv->add_option("--manifest", adv_manifest, "dataset manifest")->required();
  adv->add_option("--threshold", adv_threshold, "stage files at or below this size");
  adv->add_option("--capacity", adv_capacity, "fast-tier byte budget");
  adv->add_option("--movelist", adv_movelist, "write the selected files here");

  // report
  auto* rep = app.add_subcommand("report", "render a report from a profiler log");
  std::string rep_log, rep_manifest, rep_format = "text", rep_prefix;
  rep->add_option("--log", rep_log, "profiler .iotrace.ndjson log")->required();
  rep->add_option("--manifest", rep_manifest, "manifest for file sizes");
  rep->add_option("--format", rep_format, "text|json");
  rep->add_option("--out-prefix", rep_prefix, "also write report files");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints the message/help
    return e.get_exit_code() == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (mk->parsed()) {
      if (mk_model == "lognormal")
        spec.model = DatasetSpec::SizeModel::kLognormal;
      else if (mk_model == "manifest")
        spec.model = DatasetSpec::SizeModel::kManifest;
      else if (mk_model == "fixed")
        spec.model = DatasetSpec::SizeModel::kFixed;
      else
        throw CLI::ValidationError("mkdataset", "unknown model " + mk_model);
      return cmd_mkdataset(spec, mk_dir);
    }
    if (stream->parsed()) {
      if (ckpt_every > 0) sf.checkpoint_every = ckpt_every;
      return cmd_stream(sf);
    }
    if (ckpt->parsed())
      return cmd_checkpoint(ck_dir, ck_prefix, ck_n, ck_writes, ck_bytes);
    if (run->parsed()) return cmd_run(run_target, run_prefix, run_dxt, run_format);
    if (val->parsed()) return cmd_validate(val_windows, val_oracle, val_tol);
    if (oh->parsed()) return cmd_overhead(of, oh_reps);
    if (adv->parsed())
      return cmd_advise(adv_manifest, adv_threshold, adv_capacity, adv_movelist);
    if (rep->parsed()) return cmd_report(rep_log, rep_manifest, rep_format, rep_prefix);
  } catch (const CLI::Error& e) {
    std::cerr << "iotrace: " << e.what() << "\n";
    return kExitUsage;
  } catch (const MismatchedRun& e) {
    std::cerr << "iotrace: mismatched run: " << e.what() << "\n";
    return kExitValidationFail;
  } catch (const Error& e) {
    std::cerr << "iotrace: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "iotrace: " << e.what() << "\n";
    return 1;
  }
  return kExitUsage;
}
