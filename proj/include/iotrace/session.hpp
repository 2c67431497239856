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

#ifndef IOTRACE_SESSION_HPP
#define IOTRACE_SESSION_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "iotrace/collector.hpp"
#include "iotrace/interpose.hpp"

namespace iotrace {

/// Two snapshots bounding a profiling span.
struct ProfilingWindow {
  Snapshot start;
  Snapshot stop;
  std::uint64_t window_id = 0;
};

/// Aggregate deltas over a window. Counters are never reset between
/// windows; a window is a pure diff of its two snapshots.
struct WindowStats {
  std::uint64_t window_id = 0;
  double t_start_wall = 0;
  double t_start_mono = 0;
  double t_stop_mono = 0;
  double elapsed = 0;  // monotonic seconds
  CounterSet totals;
  std::map<std::uint64_t, CounterSet> per_file;  // records with changes only
  std::map<std::uint64_t, std::string> paths;    // names for per_file keys
  double bandwidth_read = 0;   // bytes/second
  double bandwidth_write = 0;  // bytes/second
};

/// Per-counter subtraction per record; records absent at start are diffed
/// against an all-zero baseline. Throws InvalidWindow for a non-positive
/// elapsed span.
WindowStats diff(const Snapshot& start, const Snapshot& stop,
                 std::uint64_t window_id = 0);

/// (read, write) bandwidth in bytes/second. Presentation layers convert
/// to MB/s with 1 MB = 10^6 bytes.
std::pair<double, double> window_bandwidth(const ProfilingWindow& w);

/// How a session ensures interposition before its first window.
struct AttachmentPolicy {
  enum class Kind {
    kNone,          // caller feeds the store directly (tests, replay)
    kRuntime,       // patch relocation slots on first start, restore on end
    kExpectPreload  // verify the preload library is active for this store
  };
  Kind kind = Kind::kNone;
  std::vector<SymbolTarget> targets;  // empty = full catalog
  ScanOptions scan;
};

/// Profiling lifecycle: start/stop windows bounded by snapshots, with
/// repeated stop/restart cycles in one process. Collection continues
/// between windows; end() (or destruction) detaches runtime attachments.
/// Session calls are made from one controlling thread; collection runs
/// concurrently on application threads.
class Session {
 public:
  explicit Session(RecordStore& store, AttachmentPolicy policy = {});
  ~Session();

  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  /// Opens a window: ensures attachment, takes the start snapshot.
  /// Throws WindowAlreadyOpen if a window is open.
  void start();

  /// Closes the window with a fresh stop snapshot. Collection continues.
  ProfilingWindow stop();

  /// stop+start cycle sharing one boundary snapshot, so consecutive
  /// windows partition the run exactly.
  ProfilingWindow cycle();

  /// Detaches a runtime attachment and deactivates collection into this
  /// store. Idempotent.
  void end();

  bool window_open() const { return open_start_.has_value(); }
  std::uint64_t windows_closed() const { return next_window_id_ - 1; }
  RecordStore& store() { return store_; }

  /// Start snapshot of the currently open window; null when closed.
  const Snapshot* current_start() const {
    return open_start_ ? &*open_start_ : nullptr;
  }

 private:
  void ensure_attached();

  RecordStore& store_;
  AttachmentPolicy policy_;
  AttachmentState attach_state_;
  std::optional<Snapshot> open_start_;
  std::uint64_t next_window_id_ = 1;
};

struct WindowedRunHooks {
  std::function<void()> before_boundary;  // e.g. quiesce worker I/O
  std::function<void()> after_boundary;
};

/// Drives `step_fn` until it returns false, executing a stop+start cycle
/// after every `every_n_steps` steps. Emitted windows partition the run;
/// a trailing partial window is emitted only if it contains steps.
std::vector<WindowStats> run_windowed_steps(Session& session,
                                            std::uint64_t every_n_steps,
                                            const std::function<bool()>& step_fn,
                                            const WindowedRunHooks& hooks = {});

}  // namespace iotrace

#endif  // IOTRACE_SESSION_HPP
