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
// Lifecycle of the preload library: collection is armed in a constructor
// (before main) and the profiler log is emitted in a destructor at
// process exit — the classic transparent-profiler shape.

#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <string>

#include "iotrace/clock.hpp"
#include "iotrace/collector.hpp"
#include "iotrace/errors.hpp"
#include "iotrace/export.hpp"
#include "iotrace/hooks.hpp"
#include "iotrace/workload.hpp"

namespace {

// Heap-allocated and deliberately never freed: application threads may
// still run I/O during process teardown.
iotrace::RecordStore* g_store = nullptr;
double g_t_start_wall = 0;
double g_t_start_mono = 0;
bool g_enabled = false;

bool env_enabled() {
  const char* v = std::getenv("IOTRACE_ENABLE");
  return !v || std::string_view(v) != "0";
}

}  // namespace

extern "C" iotrace::RecordStore* iotrace_preload_store() { return g_store; }

extern "C" int iotrace_preload_active() { return g_enabled ? 1 : 0; }

__attribute__((constructor)) static void iotrace_preload_init() {
  if (!env_enabled()) return;
  try {
    iotrace::hooks::resolve_real_symbols();
  } catch (const iotrace::RealSymbolUnresolvable& e) {
    std::fprintf(stderr, "iotrace: preload disabled: %s\n", e.what());
    return;
  }
  auto targets = iotrace::catalog_from_env();
  iotrace::hooks::set_enabled_symbols(targets);
  g_store = new iotrace::RecordStore(iotrace::StoreConfig::from_env());
  g_t_start_wall = iotrace::wall_now();
  g_t_start_mono = iotrace::mono_now();
  g_enabled = true;
  iotrace::hooks::set_active_store(g_store);
}

__attribute__((destructor)) static void iotrace_preload_exit() {
  if (!g_enabled || !g_store) return;
  const char* prefix = std::getenv("IOTRACE_OUT");
  if (!prefix || !*prefix) return;
  iotrace::hooks::SuppressionGuard guard;
  try {
    iotrace::Snapshot snap = g_store->snapshot();
    iotrace::LogHeader header;
    header.hostname = iotrace::hostname();
    header.pid = getpid();
    header.run_id = iotrace::make_run_id(static_cast<std::uint64_t>(getpid()));
    header.t_start_wall = g_t_start_wall;
    header.t_start_mono = g_t_start_mono;
    header.t_snap_wall = snap.t_wall;
    header.t_snap_mono = snap.t_mono;
    iotrace::write_log(snap, header, std::string(prefix) + ".iotrace.ndjson");

    if (g_store->config().dxt_enabled) {
      iotrace::ProfilingWindow whole;
      whole.stop = snap;
      whole.start.t_wall = g_t_start_wall;
      whole.start.t_mono = g_t_start_mono;
      try {
        iotrace::write_trace_events(whole, std::string(prefix) + ".trace.json");
      } catch (const iotrace::NoSegments&) {
        // nothing traced; the log alone is still a complete artifact
      }
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "iotrace: log emission failed: %s\n", e.what());
  }
}
