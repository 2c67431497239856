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

#ifndef IOTRACE_EXPORT_HPP
#define IOTRACE_EXPORT_HPP

#include <filesystem>
#include <iosfwd>
#include <string>

#include "json.hpp"

#include "iotrace/analysis.hpp"
#include "iotrace/collector.hpp"
#include "iotrace/session.hpp"

namespace iotrace {

constexpr int kLogVersion = 1;

struct LogHeader {
  int version = kLogVersion;
  std::string hostname;
  std::int64_t pid = 0;
  std::string run_id;
  double t_start_wall = 0;  // collection start
  double t_start_mono = 0;
  double t_snap_wall = 0;  // snapshot instant
  double t_snap_mono = 0;
};

/// Newline-delimited JSON profiler log: header line, one line per record,
/// one line per trace segment, footer with counts. Deterministic: records
/// ordered by record_id, segments by timestamp. Round-trips losslessly
/// through load_log.
void write_log(const Snapshot& snap, const LogHeader& header, std::ostream& out);
void write_log(const Snapshot& snap, const LogHeader& header,
               const std::filesystem::path& path);

struct LoadedLog {
  LogHeader header;
  Snapshot snapshot;
};

/// Throws MalformedLog (with the offending line number) and
/// VersionMismatch for unknown header versions.
LoadedLog load_log(std::istream& in);
LoadedLog load_log(const std::filesystem::path& path);

struct TraceExportOptions {
  /// Timeline lanes are capped at the top-N records by bytes transferred;
  /// runs with very large file counts would otherwise be unviewable.
  std::size_t max_lanes = 64;
  std::int64_t pid = 0;  // 0 = current process
};

/// Trace-event JSON array (complete "X" events, microsecond timestamps
/// relative to the window start). One lane per file; zero-length reads
/// are exported with length 0 so the trailing-EOF signature is visible
/// in a viewer. Throws NoSegments when the window span holds no segments
/// (tracing disabled) — report-only output is still possible then.
nlohmann::ordered_json trace_events_json(const ProfilingWindow& w,
                                         const TraceExportOptions& opts = {});
void write_trace_events(const ProfilingWindow& w, const std::filesystem::path& path,
                        const TraceExportOptions& opts = {});

enum class ReportFormat { kText, kJson };

std::string render_report(const ReportBundle& bundle, ReportFormat format);
nlohmann::ordered_json report_to_json(const ReportBundle& bundle);
ReportBundle report_from_json(const nlohmann::json& j);

// Shared serialization helpers (also used by the run artifacts).
nlohmann::ordered_json counters_to_json(const CounterSet& c);
CounterSet counters_from_json(const nlohmann::json& j);

}  // namespace iotrace

#endif  // IOTRACE_EXPORT_HPP
