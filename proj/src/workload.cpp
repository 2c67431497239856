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

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstring>
#include <fstream>
#include <mutex>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include "iotrace/clock.hpp"
#include "iotrace/errors.hpp"
#include "iotrace/hash.hpp"
#include "iotrace/hooks.hpp"

namespace iotrace {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

std::string make_run_id(std::uint64_t seed) {
  std::uint64_t mix = fnv1a64("run") ^ seed;
  mix ^= static_cast<std::uint64_t>(getpid()) << 32;
  mix ^= static_cast<std::uint64_t>(wall_now() * 1e6);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(mix));
  return buf;
}

// ---------------------------------------------------------------------------
// dataset generation

namespace {

void write_file_bytes(const fs::path& path, std::uint64_t size, std::uint64_t seed) {
  hooks::SuppressionGuard guard;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Unwritable("cannot create " + path.string());
  // One seeded 64 KiB block, repeated; content only matters for checksums.
  static constexpr std::size_t kBlock = 64 * 1024;
  std::vector<char> block(kBlock);
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < kBlock; i += 8) {
    std::uint64_t v = rng();
    std::memcpy(block.data() + i, &v, 8);
  }
  std::uint64_t left = size;
  while (left > 0) {
    std::size_t n = static_cast<std::size_t>(std::min<std::uint64_t>(left, kBlock));
    out.write(block.data(), static_cast<std::streamsize>(n));
    if (!out) {
      if (errno == ENOSPC) throw DiskFull("disk full writing " + path.string());
      throw IoFailure("write failed for " + path.string());
    }
    left -= n;
  }
}

}  // namespace

Manifest make_dataset(const DatasetSpec& spec, const fs::path& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Unwritable("cannot create dataset dir " + out_dir.string());

  std::vector<std::uint64_t> sizes;
  Manifest nominal;  // sizes recorded in the manifest
  switch (spec.model) {
    case DatasetSpec::SizeModel::kFixed:
      sizes.assign(spec.file_count, spec.fixed_size);
      break;
    case DatasetSpec::SizeModel::kLognormal: {
      std::mt19937_64 rng(spec.seed);
      std::normal_distribution<double> normal(
          std::log(static_cast<double>(std::max<std::uint64_t>(spec.median_bytes, 1))),
          spec.sigma);
      sizes.reserve(spec.file_count);
      for (std::uint64_t i = 0; i < spec.file_count; ++i)
        sizes.push_back(std::max<std::uint64_t>(
            1, static_cast<std::uint64_t>(std::llround(std::exp(normal(rng))))));
      break;
    }
    case DatasetSpec::SizeModel::kManifest: {
      Manifest src = load_manifest(spec.manifest_path);
      sizes.reserve(src.size());
      for (const auto& e : src) sizes.push_back(e.size);
      break;
    }
  }

  Manifest manifest;
  manifest.reserve(sizes.size());
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "data_%06zu.bin", i);
    fs::path p = out_dir / name;
    std::uint64_t nominal_size = sizes[i];
    std::uint64_t on_disk = nominal_size;
    if (spec.model == DatasetSpec::SizeModel::kManifest &&
        spec.on_disk_scale != 1.0)
      on_disk = static_cast<std::uint64_t>(
          std::llround(static_cast<double>(nominal_size) * spec.on_disk_scale));
    write_file_bytes(p, on_disk, spec.seed ^ (i * 0x9e3779b97f4a7c15ULL));
    manifest.push_back({p.string(), nominal_size});
  }
  save_manifest(manifest, out_dir / "manifest.tsv");
  return manifest;
}

Manifest load_manifest(const fs::path& path) {
  hooks::SuppressionGuard guard;
  std::ifstream in(path);
  if (!in) throw IoFailure("cannot open manifest " + path.string());
  Manifest m;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto tab = line.rfind('\t');
    if (tab == std::string::npos)
      throw MalformedLog("manifest line missing size column", line_no);
    ManifestEntry e;
    e.path = line.substr(0, tab);
    char* end = nullptr;
    e.size = std::strtoull(line.c_str() + tab + 1, &end, 10);
    if (!end || *end != '\0')
      throw MalformedLog("manifest size is not a number", line_no);
    m.push_back(std::move(e));
  }
  return m;
}

void save_manifest(const Manifest& manifest, const fs::path& path) {
  hooks::SuppressionGuard guard;
  std::ofstream out(path);
  if (!out) throw Unwritable("cannot write manifest " + path.string());
  for (const auto& e : manifest) out << e.path << '\t' << e.size << '\n';
  if (!out) throw IoFailure("writing manifest failed");
}

// ---------------------------------------------------------------------------
// oracle log

std::uint64_t OracleLog::total_bytes_read() const {
  std::uint64_t n = 0;
  for (const auto& e : entries)
    if (e.kind == OracleEntry::Kind::kRead) n += e.length;
  return n;
}

std::uint64_t OracleLog::total_reads() const {
  std::uint64_t n = 0;
  for (const auto& e : entries)
    if (e.kind == OracleEntry::Kind::kRead) ++n;
  return n;
}

std::uint64_t OracleLog::total_opens() const {
  std::uint64_t n = 0;
  for (const auto& e : entries)
    if (e.kind == OracleEntry::Kind::kOpen) ++n;
  return n;
}

std::uint64_t OracleLog::bytes_read_between(double t_lo, double t_hi) const {
  std::uint64_t n = 0;
  for (const auto& e : entries)
    if (e.kind == OracleEntry::Kind::kRead && e.t1 > t_lo && e.t1 <= t_hi)
      n += e.length;
  return n;
}

namespace {

const char* oracle_kind_name(OracleEntry::Kind k) {
  switch (k) {
    case OracleEntry::Kind::kOpen: return "open";
    case OracleEntry::Kind::kClose: return "close";
    case OracleEntry::Kind::kRead: return "read";
    case OracleEntry::Kind::kWrite: return "write";
  }
  return "?";
}

OracleEntry::Kind oracle_kind_from(const std::string& s) {
  if (s == "open") return OracleEntry::Kind::kOpen;
  if (s == "close") return OracleEntry::Kind::kClose;
  if (s == "read") return OracleEntry::Kind::kRead;
  if (s == "write") return OracleEntry::Kind::kWrite;
  throw MismatchedRun("oracle log has unknown op kind '" + s + "'");
}

}  // namespace

void OracleLog::save(const fs::path& path) const {
  hooks::SuppressionGuard guard;
  std::ofstream out(path);
  if (!out) throw Unwritable("cannot write oracle log " + path.string());
  ordered_json h;
  h["type"] = "oracle_header";
  h["version"] = 1;
  h["run_id"] = run_id;
  h["paths"] = paths;
  out << h.dump() << '\n';
  for (const auto& e : entries) {
    ordered_json j;
    j["type"] = "op";
    j["k"] = oracle_kind_name(e.kind);
    j["th"] = e.thread;
    j["p"] = e.path_index;
    j["off"] = e.offset;
    j["len"] = e.length;
    j["t0"] = e.t0;
    j["t1"] = e.t1;
    out << j.dump() << '\n';
  }
  ordered_json f;
  f["type"] = "end";
  f["ops"] = entries.size();
  out << f.dump() << '\n';
  if (!out) throw IoFailure("writing oracle log failed");
}

OracleLog OracleLog::load(const fs::path& path) {
  hooks::SuppressionGuard guard;
  std::ifstream in(path);
  if (!in) throw IoFailure("cannot open oracle log " + path.string());
  OracleLog log;
  std::string line;
  bool header = false, end = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception&) {
      throw MismatchedRun("oracle log is corrupt or truncated mid-line");
    }
    std::string type = j.value("type", "");
    if (type == "oracle_header") {
      header = true;
      log.run_id = j.at("run_id").get<std::string>();
      log.paths = j.at("paths").get<std::vector<std::string>>();
    } else if (type == "op") {
      OracleEntry e;
      e.kind = oracle_kind_from(j.at("k").get<std::string>());
      e.thread = j.at("th").get<int>();
      e.path_index = j.at("p").get<std::uint32_t>();
      e.offset = j.at("off").get<std::uint64_t>();
      e.length = j.at("len").get<std::uint64_t>();
      e.t0 = j.at("t0").get<double>();
      e.t1 = j.at("t1").get<double>();
      log.entries.push_back(e);
    } else if (type == "end") {
      end = true;
      if (j.at("ops").get<std::size_t>() != log.entries.size())
        throw MismatchedRun("oracle log op count disagrees with end marker");
    }
  }
  if (!header || !end)
    throw MismatchedRun("oracle log is incomplete (missing header or end marker)");
  return log;
}

// ---------------------------------------------------------------------------
// STREAM workload

namespace {

struct StreamShared {
  // work
  std::vector<std::uint32_t> order;  // indices into paths/sizes, length = total
  std::vector<std::string> paths;
  std::vector<std::uint64_t> disk_sizes;
  std::uint64_t chunk = 1 << 20;
  bool zero_read = true;
  std::atomic<std::uint64_t> next{0};

  // quiesce gate
  std::mutex gate_mu;
  std::condition_variable gate_cv;
  bool paused = false;
  int active_readers = 0;

  // batch assembly + bounded prefetch queue
  std::mutex q_mu;
  std::condition_variable push_cv, pop_cv;
  std::uint64_t batch_size = 1;
  std::uint64_t cap = 1;
  std::uint64_t samples_pending = 0;
  std::uint64_t batches_ready = 0;
  std::uint64_t prefetch_peak = 0;

  // failure propagation
  std::atomic<bool> aborted{false};
  std::mutex err_mu;
  std::exception_ptr first_error;

  void fail(std::exception_ptr e) {
    {
      std::lock_guard lock(err_mu);
      if (!first_error) first_error = e;
    }
    aborted.store(true);
    gate_cv.notify_all();
    push_cv.notify_all();
    pop_cv.notify_all();
  }
  void rethrow_if_failed() {
    if (!aborted.load()) return;
    std::lock_guard lock(err_mu);
    if (first_error) std::rethrow_exception(first_error);
  }
};

void reader_loop(StreamShared& sh, int tid, std::vector<OracleEntry>& log) {
  std::vector<char> buf(sh.chunk);
  for (;;) {
    std::uint64_t i = sh.next.fetch_add(1, std::memory_order_relaxed);
    if (i >= sh.order.size() || sh.aborted.load()) break;
    std::uint32_t file_idx = sh.order[i];
    const std::string& path = sh.paths[file_idx];
    std::uint64_t size = sh.disk_sizes[file_idx];

    {
      std::unique_lock gate(sh.gate_mu);
      sh.gate_cv.wait(gate, [&] { return !sh.paused || sh.aborted.load(); });
      if (sh.aborted.load()) break;
      ++sh.active_readers;
    }

    bool failed = false;
    double t0 = mono_now();
    int fd = ::open(path.c_str(), O_RDONLY);
    double t1 = mono_now();
    if (fd < 0) {
      sh.fail(std::make_exception_ptr(
          IoFailure("cannot open " + path + ": " + std::strerror(errno))));
      failed = true;
    } else {
      log.push_back({OracleEntry::Kind::kOpen, tid, file_idx, 0, 0, t0, t1});
      std::uint64_t off = 0;
      for (;;) {
        if (!sh.zero_read && off >= size) break;
        t0 = mono_now();
        ssize_t n = ::pread(fd, buf.data(), buf.size(), static_cast<off_t>(off));
        t1 = mono_now();
        if (n < 0) {
          sh.fail(std::make_exception_ptr(
              IoFailure("read failed on " + path + ": " + std::strerror(errno))));
          failed = true;
          break;
        }
        log.push_back({OracleEntry::Kind::kRead, tid, file_idx, off,
                       static_cast<std::uint64_t>(n), t0, t1});
        if (n == 0) break;
        off += static_cast<std::uint64_t>(n);
      }
      t0 = mono_now();
      ::close(fd);
      t1 = mono_now();
      log.push_back({OracleEntry::Kind::kClose, tid, file_idx, 0, 0, t0, t1});
    }

    {
      std::lock_guard gate(sh.gate_mu);
      --sh.active_readers;
    }
    sh.gate_cv.notify_all();
    if (failed) break;

    // Deliver the sample; completing a batch pushes into the bounded
    // prefetch queue (blocking while full).
    {
      std::unique_lock q(sh.q_mu);
      if (++sh.samples_pending == sh.batch_size) {
        sh.samples_pending = 0;
        sh.push_cv.wait(q, [&] {
          return sh.batches_ready < sh.cap || sh.aborted.load();
        });
        if (sh.aborted.load()) break;
        ++sh.batches_ready;
        sh.prefetch_peak = std::max(sh.prefetch_peak, sh.batches_ready);
        sh.pop_cv.notify_one();
      }
    }
  }
}

void pop_batch(StreamShared& sh) {
  std::unique_lock q(sh.q_mu);
  sh.pop_cv.wait(q, [&] { return sh.batches_ready > 0 || sh.aborted.load(); });
  sh.rethrow_if_failed();
  --sh.batches_ready;
  sh.push_cv.notify_one();
}

void quiesce(StreamShared& sh) {
  std::unique_lock gate(sh.gate_mu);
  sh.paused = true;
  sh.gate_cv.wait(gate, [&] { return sh.active_readers == 0 || sh.aborted.load(); });
}

void resume(StreamShared& sh) {
  {
    std::lock_guard gate(sh.gate_mu);
    sh.paused = false;
  }
  sh.gate_cv.notify_all();
}

void write_checkpoint(const fs::path& dir, std::uint64_t index,
                      std::uint64_t writes, std::uint64_t bytes_per_write,
                      std::vector<OracleEntry>& log,
                      std::vector<std::string>& paths) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  char name[32];
  std::snprintf(name, sizeof(name), "ckpt_%04llu.bin",
                static_cast<unsigned long long>(index));
  fs::path p = dir / name;
  std::vector<char> payload(bytes_per_write, '\x5a');
  double t0 = mono_now();
  FILE* f = ::fopen(p.string().c_str(), "wb");
  double t1 = mono_now();
  if (!f) throw Unwritable("cannot create checkpoint " + p.string());
  auto path_idx = static_cast<std::uint32_t>(paths.size());
  paths.push_back(p.string());
  log.push_back({OracleEntry::Kind::kOpen, -1, path_idx, 0, 0, t0, t1});
  for (std::uint64_t i = 0; i < writes; ++i) {
    t0 = mono_now();
    std::size_t n = ::fwrite(payload.data(), 1, payload.size(), f);
    t1 = mono_now();
    log.push_back({OracleEntry::Kind::kWrite, -1, path_idx, i * bytes_per_write,
                   n, t0, t1});
  }
  t0 = mono_now();
  ::fclose(f);
  t1 = mono_now();
  log.push_back({OracleEntry::Kind::kClose, -1, path_idx, 0, 0, t0, t1});
}

}  // namespace

StreamResult run_stream(RecordStore& store, const WorkloadConfig& cfg,
                        const Manifest& manifest, const AttachmentPolicy& policy) {
  if (manifest.empty()) throw DatasetMissing("dataset manifest is empty");

  StreamShared sh;
  sh.chunk = std::max<std::uint64_t>(1, cfg.chunk_size);
  sh.zero_read = cfg.emulate_trailing_zero_read;
  sh.batch_size = std::max<std::uint64_t>(1, cfg.batch_size);
  sh.cap = std::max<std::uint64_t>(1, cfg.prefetch_depth);

  sh.paths.reserve(manifest.size());
  sh.disk_sizes.reserve(manifest.size());
  for (const auto& e : manifest) {
    sh.paths.push_back(e.path);
    struct stat st {};
    if (::stat(e.path.c_str(), &st) != 0)
      throw DatasetMissing("dataset file missing: " + e.path);
    sh.disk_sizes.push_back(static_cast<std::uint64_t>(st.st_size));
  }

  std::vector<std::uint32_t> perm(manifest.size());
  std::iota(perm.begin(), perm.end(), 0);
  if (cfg.shuffle) {
    std::mt19937_64 rng(cfg.seed);
    std::shuffle(perm.begin(), perm.end(), rng);
  }
  const std::uint64_t steps = std::max<std::uint64_t>(1, cfg.steps);
  std::uint64_t total = sh.batch_size * steps;
  sh.order.reserve(total);
  for (std::uint64_t i = 0; i < total; ++i)
    sh.order.push_back(perm[i % perm.size()]);

  StreamResult result;
  result.run_id = make_run_id(cfg.seed);
  result.oracle.run_id = result.run_id;

  Session session(store, policy);
  double wall0 = mono_now();
  session.start();
  Snapshot s0 = *session.current_start();

  unsigned n_threads = static_cast<unsigned>(std::max<std::uint64_t>(1, cfg.threads));
  std::vector<std::vector<OracleEntry>> thread_logs(n_threads);
  std::vector<std::thread> workers;
  workers.reserve(n_threads);
  for (unsigned t = 0; t < n_threads; ++t)
    workers.emplace_back([&sh, t, &thread_logs] {
      try {
        reader_loop(sh, static_cast<int>(t), thread_logs[t]);
      } catch (...) {
        sh.fail(std::current_exception());
      }
    });

  std::vector<OracleEntry> main_log;
  std::uint64_t in_window = 0;
  bool want_windows = cfg.window_every_steps > 0;
  try {
    for (std::uint64_t step = 1; step <= steps; ++step) {
      pop_batch(sh);
      if (cfg.compute_time_s > 0)
        std::this_thread::sleep_for(
            std::chrono::duration<double>(cfg.compute_time_s));
      if (cfg.checkpoint_every && *cfg.checkpoint_every > 0 &&
          step % *cfg.checkpoint_every == 0)
        write_checkpoint(cfg.dataset_dir / "checkpoints",
                         step / *cfg.checkpoint_every, cfg.writes_per_checkpoint,
                         cfg.bytes_per_write, main_log, sh.paths);
      ++result.steps_done;
      if (want_windows && ++in_window == cfg.window_every_steps) {
        if (cfg.sync_windows) quiesce(sh);
        ProfilingWindow w = session.cycle();
        if (cfg.sync_windows) resume(sh);
        result.windows.push_back(diff(w.start, w.stop, w.window_id));
        in_window = 0;
      }
    }
  } catch (...) {
    sh.fail(std::current_exception());
    for (auto& w : workers) w.join();
    throw;
  }

  for (auto& w : workers) w.join();
  sh.rethrow_if_failed();

  ProfilingWindow last = session.stop();
  if (want_windows && in_window > 0)
    result.windows.push_back(diff(last.start, last.stop, last.window_id));

  result.whole_window = ProfilingWindow{std::move(s0), last.stop, 0};
  result.whole =
      diff(result.whole_window.start, result.whole_window.stop, 0);
  result.wall_seconds = mono_now() - wall0;
  result.files_consumed = total;
  result.prefetch_peak = sh.prefetch_peak;

  // Merge per-thread oracle logs; t0 order gives one coherent timeline.
  result.oracle.paths = sh.paths;
  std::size_t total_entries = main_log.size();
  for (const auto& l : thread_logs) total_entries += l.size();
  result.oracle.entries.reserve(total_entries);
  for (const auto& l : thread_logs)
    result.oracle.entries.insert(result.oracle.entries.end(), l.begin(), l.end());
  result.oracle.entries.insert(result.oracle.entries.end(), main_log.begin(),
                               main_log.end());
  std::sort(result.oracle.entries.begin(), result.oracle.entries.end(),
            [](const OracleEntry& a, const OracleEntry& b) { return a.t0 < b.t0; });
  return result;
}

CheckpointResult run_checkpoint_emulation(RecordStore& store, const fs::path& dir,
                                          std::uint64_t n_checkpoints,
                                          std::uint64_t writes_per_checkpoint,
                                          std::uint64_t bytes_per_write,
                                          const AttachmentPolicy& policy) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Unwritable("cannot create checkpoint dir " + dir.string());

  Session session(store, policy);
  session.start();
  std::vector<OracleEntry> log;
  std::vector<std::string> paths;
  for (std::uint64_t i = 0; i < n_checkpoints; ++i)
    write_checkpoint(dir, i + 1, writes_per_checkpoint, bytes_per_write, log, paths);
  ProfilingWindow w = session.stop();

  CheckpointResult result;
  result.whole = diff(w.start, w.stop, 0);
  result.expected_stdio_writes = n_checkpoints * writes_per_checkpoint;
  result.expected_bytes = result.expected_stdio_writes * bytes_per_write;
  return result;
}

// ---------------------------------------------------------------------------
// run artifacts + validation

WindowRow window_row(const WindowStats& w) {
  WindowRow r;
  r.window_id = w.window_id;
  r.t_start_mono = w.t_start_mono;
  r.t_stop_mono = w.t_stop_mono;
  r.opens = w.totals.opens;
  r.reads = w.totals.reads;
  r.bytes_read = w.totals.bytes_read;
  r.bandwidth_read = w.bandwidth_read;
  return r;
}

namespace {

ordered_json row_to_json(const WindowRow& r) {
  ordered_json j;
  j["window_id"] = r.window_id;
  j["t_start_mono"] = r.t_start_mono;
  j["t_stop_mono"] = r.t_stop_mono;
  j["opens"] = r.opens;
  j["reads"] = r.reads;
  j["bytes_read"] = r.bytes_read;
  j["bandwidth_read"] = r.bandwidth_read;
  return j;
}

WindowRow row_from_json(const json& j) {
  WindowRow r;
  r.window_id = j.at("window_id").get<std::uint64_t>();
  r.t_start_mono = j.at("t_start_mono").get<double>();
  r.t_stop_mono = j.at("t_stop_mono").get<double>();
  r.opens = j.at("opens").get<std::uint64_t>();
  r.reads = j.at("reads").get<std::uint64_t>();
  r.bytes_read = j.at("bytes_read").get<std::uint64_t>();
  r.bandwidth_read = j.at("bandwidth_read").get<double>();
  return r;
}

}  // namespace

void save_run_artifacts(const RunArtifacts& a, const fs::path& path) {
  hooks::SuppressionGuard guard;
  ordered_json j;
  j["version"] = 1;
  j["run_id"] = a.run_id;
  ordered_json rows = ordered_json::array();
  for (const auto& r : a.windows) rows.push_back(row_to_json(r));
  j["windows"] = std::move(rows);
  j["whole"] = row_to_json(a.whole);
  std::ofstream out(path);
  if (!out) throw Unwritable("cannot write " + path.string());
  out << j.dump(1) << '\n';
  if (!out) throw IoFailure("writing run artifacts failed");
}

RunArtifacts load_run_artifacts(const fs::path& path) {
  hooks::SuppressionGuard guard;
  std::ifstream in(path);
  if (!in) throw IoFailure("cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw MalformedLog(std::string("bad run artifacts: ") + e.what(), 0);
  }
  RunArtifacts a;
  a.run_id = j.at("run_id").get<std::string>();
  for (const auto& r : j.at("windows")) a.windows.push_back(row_from_json(r));
  a.whole = row_from_json(j.at("whole"));
  return a;
}

ValidationReport validate_run(const RunArtifacts& artifacts, const OracleLog& oracle,
                              double tolerance) {
  if (artifacts.run_id != oracle.run_id)
    throw MismatchedRun("window artifacts run " + artifacts.run_id +
                        " vs oracle run " + oracle.run_id);

  ValidationReport report;
  report.tolerance = tolerance;
  report.pass = true;
  std::ostringstream detail;

  auto check = [&](const WindowRow& row) {
    WindowVerdict v;
    v.window_id = row.window_id;
    v.profiler_bytes = row.bytes_read;
    v.oracle_bytes = oracle.bytes_read_between(row.t_start_mono, row.t_stop_mono);
    double span = row.t_stop_mono - row.t_start_mono;
    v.profiler_bw = row.bandwidth_read;
    v.oracle_bw = span > 0 ? static_cast<double>(v.oracle_bytes) / span : 0;
    v.bytes_exact = v.profiler_bytes == v.oracle_bytes;
    double err = v.oracle_bw > 0
                     ? std::abs(v.profiler_bw - v.oracle_bw) / v.oracle_bw
                     : (v.profiler_bw == 0 ? 0.0 : 1.0);
    v.bandwidth_ok = err <= tolerance;
    if (!v.bytes_exact || !v.bandwidth_ok) {
      report.pass = false;
      detail << "window " << v.window_id << ": profiler " << v.profiler_bytes
             << " B vs oracle " << v.oracle_bytes << " B, bw "
             << v.profiler_bw / 1e6 << " vs " << v.oracle_bw / 1e6 << " MB/s\n";
    }
    report.windows.push_back(v);
  };

  for (const auto& row : artifacts.windows) check(row);
  check(artifacts.whole);

  // Whole-run op counts must match too, not just bytes.
  const WindowRow& whole = artifacts.whole;
  if (whole.reads != oracle.total_reads() || whole.opens != oracle.total_opens()) {
    report.pass = false;
    detail << "whole run: profiler " << whole.opens << " opens/" << whole.reads
           << " reads vs oracle " << oracle.total_opens() << "/"
           << oracle.total_reads() << "\n";
  }
  report.detail = detail.str();
  return report;
}

// ---------------------------------------------------------------------------
// overhead harness

OverheadResult measure_overhead(const WorkloadConfig& base, const Manifest& manifest,
                                const OverheadConfig& cfg) {
  enum Mode { kOff = 0, kWhole = 1, kPeriodic = 2 };
  std::array<std::vector<double>, 3> samples;
  int reps = std::max(1, cfg.repetitions);

  auto run_mode = [&](Mode mode) {
    WorkloadConfig wc = base;
    wc.window_every_steps = mode == kPeriodic ? cfg.window_every_steps : 0;
    wc.sync_windows = false;  // do not distort the pipeline being timed

    StoreConfig sc;
    sc.dxt_enabled = (mode == kWhole);  // trace collection only in full profile
    RecordStore store(sc);

    AttachmentPolicy policy;
    if (mode != kOff) {
      policy.kind = AttachmentPolicy::Kind::kRuntime;
      policy.scan.object_filter = {"[exe]"};
    }

    double t0 = mono_now();
    StreamResult r = run_stream(store, wc, manifest, policy);
    if (mode == kWhole) {
      // In-situ analysis belongs to the whole-run profile: full report
      // bundle plus trace-event extraction, all in memory.
      ReportOptions opts;
      ReportBundle bundle = build_report(r.whole, r.whole_window.stop, opts);
      (void)bundle;
      try {
        auto events = trace_events_json(r.whole_window);
        (void)events;
      } catch (const NoSegments&) {
      }
    } else if (mode == kPeriodic) {
      auto series = bandwidth_series(r.windows);
      (void)series;
    }
    return mono_now() - t0;
  };

  // Warm the page cache once so the first timed run is not penalized.
  run_mode(kOff);

  std::mt19937_64 rng(cfg.seed);
  for (int rep = 0; rep < reps; ++rep) {
    std::array<Mode, 3> order = {kOff, kWhole, kPeriodic};
    std::shuffle(order.begin(), order.end(), rng);
    for (Mode m : order) samples[m].push_back(run_mode(m));
  }

  auto mean = [](const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  };
  OverheadResult out;
  out.repetitions = reps;
  out.t_off = mean(samples[kOff]);
  out.t_on_whole = mean(samples[kWhole]);
  out.t_on_periodic = mean(samples[kPeriodic]);
  out.ratio_whole = out.t_off > 0 ? (out.t_on_whole - out.t_off) / out.t_off : 0;
  out.ratio_periodic =
      out.t_off > 0 ? (out.t_on_periodic - out.t_off) / out.t_off : 0;
  return out;
}

}  // namespace iotrace
