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

#include "iotrace/session.hpp"

#include "iotrace/errors.hpp"
#include "iotrace/hooks.hpp"

namespace iotrace {

namespace {

// Count-like fields only; watermarks carry stop values by design.
bool delta_is_zero(const CounterSet& d) {
  if (d.opens || d.closes || d.reads || d.writes || d.bytes_read ||
      d.bytes_written || d.zero_reads || d.seq_reads || d.consec_reads ||
      d.seq_writes || d.consec_writes || d.stdio_opens || d.stdio_reads ||
      d.stdio_writes || d.stdio_bytes_written)
    return false;
  for (std::size_t i = 0; i < kSizeBuckets; ++i)
    if (d.read_size_hist[i] || d.write_size_hist[i]) return false;
  return true;
}

}  // namespace

WindowStats diff(const Snapshot& start, const Snapshot& stop,
                 std::uint64_t window_id) {
  double elapsed = stop.t_mono - start.t_mono;
  if (elapsed <= 0)
    throw InvalidWindow("window has non-positive elapsed time");

  WindowStats w;
  w.window_id = window_id;
  w.t_start_wall = start.t_wall;
  w.t_start_mono = start.t_mono;
  w.t_stop_mono = stop.t_mono;
  w.elapsed = elapsed;

  for (const auto& [id, rec] : stop.records) {
    auto it = start.records.find(id);
    if (it != start.records.end() && it->second == rec) continue;  // shared copy
    static const CounterSet kZero{};
    const CounterSet& base =
        it != start.records.end() ? it->second->counters : kZero;
    CounterSet d = counter_delta(rec->counters, base);
    if (delta_is_zero(d)) continue;
    accumulate(w.totals, d);
    w.per_file.emplace(id, std::move(d));
    w.paths.emplace(id, rec->path);
  }

  w.bandwidth_read = static_cast<double>(w.totals.bytes_read) / elapsed;
  w.bandwidth_write = static_cast<double>(w.totals.bytes_written) / elapsed;
  return w;
}

std::pair<double, double> window_bandwidth(const ProfilingWindow& w) {
  WindowStats s = diff(w.start, w.stop, w.window_id);
  return {s.bandwidth_read, s.bandwidth_write};
}

Session::Session(RecordStore& store, AttachmentPolicy policy)
    : store_(store), policy_(std::move(policy)) {}

Session::~Session() {
  try {
    end();
  } catch (...) {
    // never throw out of teardown
  }
}

void Session::ensure_attached() {
  switch (policy_.kind) {
    case AttachmentPolicy::Kind::kNone:
      break;
    case AttachmentPolicy::Kind::kRuntime: {
      if (attach_state_.mode == AttachMode::kRuntime) break;
      hooks::set_active_store(&store_);
      auto targets = policy_.targets.empty()
                         ? std::vector<SymbolTarget>(symbol_catalog().begin(),
                                                     symbol_catalog().end())
                         : policy_.targets;
      hooks::resolve_real_symbols();
      attach_state_ = attach(targets, hooks::wrapper_table(targets), policy_.scan);
      break;
    }
    case AttachmentPolicy::Kind::kExpectPreload:
      if (attach_state_.mode == AttachMode::kPreload) break;
      if (hooks::preload_store() != &store_)
        throw Error(
            "preload attachment expected but the preload library is not "
            "active for this store");
      attach_state_.mode = AttachMode::kPreload;
      break;
  }
}

void Session::start() {
  if (open_start_) throw WindowAlreadyOpen("a profiling window is already open");
  ensure_attached();
  open_start_ = store_.snapshot();
}

ProfilingWindow Session::stop() {
  if (!open_start_) throw NoOpenWindow("no profiling window is open");
  ProfilingWindow w;
  w.start = std::move(*open_start_);
  open_start_.reset();
  w.stop = store_.snapshot();
  w.window_id = next_window_id_++;
  return w;
}

ProfilingWindow Session::cycle() {
  if (!open_start_) throw NoOpenWindow("no profiling window is open");
  ProfilingWindow w;
  w.start = std::move(*open_start_);
  w.stop = store_.snapshot();
  w.window_id = next_window_id_++;
  open_start_ = w.stop;  // shared boundary: windows partition the run
  return w;
}

void Session::end() {
  if (attach_state_.mode == AttachMode::kRuntime) {
    attach_state_ = detach(std::move(attach_state_));
    if (hooks::active_store() == &store_) hooks::set_active_store(nullptr);
  }
  open_start_.reset();
}

std::vector<WindowStats> run_windowed_steps(Session& session,
                                            std::uint64_t every_n_steps,
                                            const std::function<bool()>& step_fn,
                                            const WindowedRunHooks& hooks) {
  if (every_n_steps == 0) every_n_steps = 1;
  std::vector<WindowStats> out;
  session.start();
  std::uint64_t in_window = 0;
  while (step_fn()) {
    if (++in_window < every_n_steps) continue;
    if (hooks.before_boundary) hooks.before_boundary();
    ProfilingWindow w = session.cycle();
    if (hooks.after_boundary) hooks.after_boundary();
    out.push_back(diff(w.start, w.stop, w.window_id));
    in_window = 0;
  }
  if (hooks.before_boundary) hooks.before_boundary();
  ProfilingWindow last = session.stop();
  if (hooks.after_boundary) hooks.after_boundary();
  if (in_window > 0) out.push_back(diff(last.start, last.stop, last.window_id));
  return out;
}

}  // namespace iotrace
