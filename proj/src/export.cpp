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

#include "iotrace/export.hpp"

#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "iotrace/errors.hpp"
#include "iotrace/hooks.hpp"

namespace iotrace {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, v);
  return buf;
}

std::string kind_name(DxtSegment::Kind k) {
  return k == DxtSegment::Kind::kRead ? "read" : "write";
}

}  // namespace

ordered_json counters_to_json(const CounterSet& c) {
  ordered_json j;
  j["opens"] = c.opens;
  j["closes"] = c.closes;
  j["reads"] = c.reads;
  j["writes"] = c.writes;
  j["bytes_read"] = c.bytes_read;
  j["bytes_written"] = c.bytes_written;
  j["zero_reads"] = c.zero_reads;
  j["seq_reads"] = c.seq_reads;
  j["consec_reads"] = c.consec_reads;
  j["seq_writes"] = c.seq_writes;
  j["consec_writes"] = c.consec_writes;
  j["max_read_offset"] = c.max_read_offset;
  j["max_write_offset"] = c.max_write_offset;
  j["read_size_hist"] = c.read_size_hist;
  j["write_size_hist"] = c.write_size_hist;
  j["stdio_opens"] = c.stdio_opens;
  j["stdio_reads"] = c.stdio_reads;
  j["stdio_writes"] = c.stdio_writes;
  j["stdio_bytes_written"] = c.stdio_bytes_written;
  j["t_first_open"] = c.t_first_open;
  j["t_first_read"] = c.t_first_read;
  j["t_last_read"] = c.t_last_read;
  j["t_first_write"] = c.t_first_write;
  j["t_last_write"] = c.t_last_write;
  return j;
}

CounterSet counters_from_json(const json& j) {
  CounterSet c;
  c.opens = j.at("opens").get<std::uint64_t>();
  c.closes = j.at("closes").get<std::uint64_t>();
  c.reads = j.at("reads").get<std::uint64_t>();
  c.writes = j.at("writes").get<std::uint64_t>();
  c.bytes_read = j.at("bytes_read").get<std::uint64_t>();
  c.bytes_written = j.at("bytes_written").get<std::uint64_t>();
  c.zero_reads = j.at("zero_reads").get<std::uint64_t>();
  c.seq_reads = j.at("seq_reads").get<std::uint64_t>();
  c.consec_reads = j.at("consec_reads").get<std::uint64_t>();
  c.seq_writes = j.at("seq_writes").get<std::uint64_t>();
  c.consec_writes = j.at("consec_writes").get<std::uint64_t>();
  c.max_read_offset = j.at("max_read_offset").get<std::uint64_t>();
  c.max_write_offset = j.at("max_write_offset").get<std::uint64_t>();
  auto rh = j.at("read_size_hist");
  auto wh = j.at("write_size_hist");
  for (std::size_t i = 0; i < kSizeBuckets; ++i) {
    c.read_size_hist[i] = rh.at(i).get<std::uint64_t>();
    c.write_size_hist[i] = wh.at(i).get<std::uint64_t>();
  }
  c.stdio_opens = j.at("stdio_opens").get<std::uint64_t>();
  c.stdio_reads = j.at("stdio_reads").get<std::uint64_t>();
  c.stdio_writes = j.at("stdio_writes").get<std::uint64_t>();
  c.stdio_bytes_written = j.at("stdio_bytes_written").get<std::uint64_t>();
  c.t_first_open = j.at("t_first_open").get<double>();
  c.t_first_read = j.at("t_first_read").get<double>();
  c.t_last_read = j.at("t_last_read").get<double>();
  c.t_first_write = j.at("t_first_write").get<double>();
  c.t_last_write = j.at("t_last_write").get<double>();
  return c;
}

void write_log(const Snapshot& snap, const LogHeader& header, std::ostream& out) {
  ordered_json h;
  h["type"] = "header";
  h["version"] = header.version;
  h["hostname"] = header.hostname;
  h["pid"] = header.pid;
  h["run_id"] = header.run_id;
  h["t_start_wall"] = header.t_start_wall;
  h["t_start_mono"] = header.t_start_mono;
  h["t_snap_wall"] = header.t_snap_wall;
  h["t_snap_mono"] = header.t_snap_mono;
  out << h.dump() << '\n';

  std::uint64_t segment_count = 0;
  for (const auto& [id, rec] : snap.records) {
    ordered_json r;
    r["type"] = "record";
    r["id"] = id;
    r["path"] = rec->path;
    r["counters"] = counters_to_json(rec->counters);
    r["truncated"] = rec->segments_truncated;
    r["segments"] = rec->segments.size();
    out << r.dump() << '\n';
    for (const auto& seg : rec->segments) {
      ordered_json s;
      s["type"] = "segment";
      s["record"] = id;
      s["kind"] = kind_name(seg.kind);
      s["offset"] = seg.offset;
      s["length"] = seg.length;
      s["t0"] = seg.t_start;
      s["t1"] = seg.t_end;
      out << s.dump() << '\n';
      ++segment_count;
    }
  }
  ordered_json f;
  f["type"] = "end";
  f["records"] = snap.records.size();
  f["segments"] = segment_count;
  out << f.dump() << '\n';
  if (!out) throw IoFailure("writing profiler log failed");
}

void write_log(const Snapshot& snap, const LogHeader& header,
               const std::filesystem::path& path) {
  hooks::SuppressionGuard guard;  // our own output must not be profiled
  std::ofstream out(path);
  if (!out) throw IoFailure("cannot open " + path.string() + " for writing");
  write_log(snap, header, out);
}

LoadedLog load_log(std::istream& in) {
  LoadedLog result;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false, end_seen = false;
  std::uint64_t segment_count = 0;
  std::map<std::uint64_t, std::shared_ptr<FileRecord>> records;
  std::map<std::uint64_t, std::uint64_t> declared_segments;

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (end_seen) throw MalformedLog("content after end marker", line_no);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw MalformedLog(std::string("bad JSON: ") + e.what(), line_no);
    }
    try {
      std::string type = j.at("type").get<std::string>();
      if (type == "header") {
        if (header_seen) throw MalformedLog("duplicate header", line_no);
        header_seen = true;
        result.header.version = j.at("version").get<int>();
        if (result.header.version != kLogVersion)
          throw VersionMismatch("unsupported log version " +
                                std::to_string(result.header.version));
        result.header.hostname = j.at("hostname").get<std::string>();
        result.header.pid = j.at("pid").get<std::int64_t>();
        result.header.run_id = j.at("run_id").get<std::string>();
        result.header.t_start_wall = j.at("t_start_wall").get<double>();
        result.header.t_start_mono = j.at("t_start_mono").get<double>();
        result.header.t_snap_wall = j.at("t_snap_wall").get<double>();
        result.header.t_snap_mono = j.at("t_snap_mono").get<double>();
      } else if (type == "record") {
        if (!header_seen) throw MalformedLog("record before header", line_no);
        auto rec = std::make_shared<FileRecord>();
        rec->record_id = j.at("id").get<std::uint64_t>();
        rec->path = j.at("path").get<std::string>();
        rec->counters = counters_from_json(j.at("counters"));
        rec->segments_truncated = j.at("truncated").get<bool>();
        declared_segments[rec->record_id] = j.at("segments").get<std::uint64_t>();
        records[rec->record_id] = std::move(rec);
      } else if (type == "segment") {
        std::uint64_t id = j.at("record").get<std::uint64_t>();
        auto it = records.find(id);
        if (it == records.end())
          throw MalformedLog("segment references unknown record", line_no);
        DxtSegment seg;
        seg.kind = j.at("kind").get<std::string>() == "write"
                       ? DxtSegment::Kind::kWrite
                       : DxtSegment::Kind::kRead;
        seg.offset = j.at("offset").get<std::uint64_t>();
        seg.length = j.at("length").get<std::uint64_t>();
        seg.t_start = j.at("t0").get<double>();
        seg.t_end = j.at("t1").get<double>();
        it->second->segments.push_back(seg);
        ++segment_count;
      } else if (type == "end") {
        end_seen = true;
        if (j.at("records").get<std::uint64_t>() != records.size() ||
            j.at("segments").get<std::uint64_t>() != segment_count)
          throw MalformedLog("end marker counts disagree with content", line_no);
      } else {
        throw MalformedLog("unknown line type '" + type + "'", line_no);
      }
    } catch (const json::exception& e) {
      throw MalformedLog(std::string("missing or mistyped field: ") + e.what(),
                         line_no);
    }
  }
  if (!header_seen) throw MalformedLog("missing header", line_no ? line_no : 1);
  if (!end_seen) throw MalformedLog("truncated log: missing end marker", line_no);
  for (const auto& [id, declared] : declared_segments)
    if (records.at(id)->segments.size() != declared)
      throw MalformedLog("record " + std::to_string(id) + " segment count mismatch",
                         line_no);

  result.snapshot.t_wall = result.header.t_snap_wall;
  result.snapshot.t_mono = result.header.t_snap_mono;
  for (auto& [id, rec] : records) result.snapshot.records.emplace(id, std::move(rec));
  return result;
}

LoadedLog load_log(const std::filesystem::path& path) {
  hooks::SuppressionGuard guard;
  std::ifstream in(path);
  if (!in) throw IoFailure("cannot open " + path.string());
  return load_log(in);
}

nlohmann::ordered_json trace_events_json(const ProfilingWindow& w,
                                         const TraceExportOptions& opts) {
  const double t0 = w.start.t_mono;
  const double t1 = w.stop.t_mono;
  std::int64_t pid = opts.pid ? opts.pid : static_cast<std::int64_t>(getpid());

  // Rank records by bytes for the lane cap, then number lanes in
  // record_id order so output is stable.
  struct Ranked {
    std::uint64_t id;
    std::uint64_t bytes;
  };
  std::vector<Ranked> ranked;
  for (const auto& [id, rec] : w.stop.records)
    if (!rec->segments.empty())
      ranked.push_back({id, rec->counters.bytes_read + rec->counters.bytes_written});
  std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
    return a.bytes != b.bytes ? a.bytes > b.bytes : a.id < b.id;
  });
  if (ranked.size() > opts.max_lanes) ranked.resize(opts.max_lanes);
  std::sort(ranked.begin(), ranked.end(),
            [](const Ranked& a, const Ranked& b) { return a.id < b.id; });

  ordered_json events = ordered_json::array();
  std::size_t total_in_span = 0;
  for (std::size_t lane = 0; lane < ranked.size(); ++lane) {
    const FileRecord& rec = *w.stop.records.at(ranked[lane].id);
    ordered_json meta;
    meta["name"] = "thread_name";
    meta["ph"] = "M";
    meta["pid"] = pid;
    meta["tid"] = lane;
    meta["args"] = ordered_json{{"name", rec.path}};
    events.push_back(std::move(meta));
    for (const auto& seg : rec.segments) {
      if (seg.t_start < t0 || seg.t_start > t1) continue;
      ++total_in_span;
      ordered_json e;
      e["name"] = kind_name(seg.kind);
      e["ph"] = "X";
      e["ts"] = (seg.t_start - t0) * 1e6;
      e["dur"] = (seg.t_end - seg.t_start) * 1e6;
      e["pid"] = pid;
      e["tid"] = lane;
      e["args"] = ordered_json{{"path", rec.path},
                               {"offset", seg.offset},
                               {"length", seg.length},
                               {"kind", kind_name(seg.kind)}};
      events.push_back(std::move(e));
    }
  }
  if (total_in_span == 0)
    throw NoSegments(
        "no trace segments in the window span (tracing disabled?)");
  return events;
}

void write_trace_events(const ProfilingWindow& w, const std::filesystem::path& path,
                        const TraceExportOptions& opts) {
  auto events = trace_events_json(w, opts);
  hooks::SuppressionGuard guard;
  std::ofstream out(path);
  if (!out) throw IoFailure("cannot open " + path.string() + " for writing");
  out << events.dump(1) << '\n';
  if (!out) throw IoFailure("writing trace events failed");
}

static ordered_json distribution_to_json(const SizeDistribution& d) {
  ordered_json j;
  j["buckets"] = d.buckets;
  j["total"] = d.total;
  j["unknown"] = d.unknown;
  return j;
}

static SizeDistribution distribution_from_json(const json& j) {
  SizeDistribution d;
  for (std::size_t i = 0; i < kSizeBuckets; ++i)
    d.buckets[i] = j.at("buckets").at(i).get<std::uint64_t>();
  d.total = j.at("total").get<std::uint64_t>();
  d.unknown = j.at("unknown").get<std::uint64_t>();
  return d;
}

nlohmann::ordered_json report_to_json(const ReportBundle& b) {
  ordered_json j;
  j["schema_version"] = 1;
  j["hostname"] = b.hostname;
  j["pid"] = b.pid;
  j["run_id"] = b.run_id;
  j["t_start_wall"] = b.t_start_wall;
  j["elapsed"] = b.elapsed;
  j["record_count"] = b.record_count;
  j["ops"] = {{"opens", b.ops.opens},
              {"closes", b.ops.closes},
              {"reads", b.ops.reads},
              {"writes", b.ops.writes},
              {"stdio_writes", b.ops.stdio_writes},
              {"reads_per_open", b.ops.reads_per_open}};
  j["bandwidth"] = {{"read_mbps", b.bandwidth_read_mbps},
                    {"write_mbps", b.bandwidth_write_mbps}};
  j["read_sizes"] = distribution_to_json(b.read_sizes);
  j["file_sizes"] = distribution_to_json(b.file_sizes);
  if (b.pattern) {
    const auto& p = *b.pattern;
    j["pattern"] = {{"reads", p.reads},
                    {"zero_reads", p.zero_reads},
                    {"seq_reads", p.seq_reads},
                    {"consec_reads", p.consec_reads},
                    {"frac_sequential", p.frac_sequential},
                    {"frac_consecutive", p.frac_consecutive},
                    {"frac_random", p.frac_random},
                    {"frac_zero", p.frac_zero}};
  } else {
    j["pattern"] = nullptr;
  }
  j["zero_read"] = {
      {"count", b.zero_diag.zero_read_count},
      {"files", b.zero_diag.affected_file_count},
      {"finding", b.zero_diag.finding == ZeroReadFinding::kTrailingEofReads
                      ? "trailing_eof_reads"
                      : "none"}};
  ordered_json rows = ordered_json::array();
  for (const auto& r : b.top_files)
    rows.push_back({{"record_id", r.record_id},
                    {"path", r.path},
                    {"opens", r.opens},
                    {"reads", r.reads},
                    {"writes", r.writes},
                    {"bytes_read", r.bytes_read},
                    {"bytes_written", r.bytes_written}});
  j["top_files"] = std::move(rows);
  ordered_json series = ordered_json::array();
  for (const auto& p : b.series)
    series.push_back({{"window", p.window_id},
                      {"read_mbps", p.read_mbps},
                      {"write_mbps", p.write_mbps}});
  j["series"] = std::move(series);
  if (b.plan) {
    const auto& p = *b.plan;
    ordered_json files = ordered_json::array();
    for (const auto& f : p.files)
      files.push_back({{"path", f.path}, {"size", f.size}});
    j["plan"] = {{"threshold", p.threshold},
                 {"staged_bytes", p.staged_bytes},
                 {"staged_file_count", p.staged_file_count},
                 {"frac_bytes", p.frac_bytes},
                 {"frac_files", p.frac_files},
                 {"capacity", p.capacity ? ordered_json(*p.capacity)
                                         : ordered_json(nullptr)},
                 {"files", std::move(files)}};
  } else {
    j["plan"] = nullptr;
  }
  return j;
}

ReportBundle report_from_json(const json& j) {
  if (j.at("schema_version").get<int>() != 1)
    throw VersionMismatch("unsupported report schema version");
  ReportBundle b;
  b.hostname = j.at("hostname").get<std::string>();
  b.pid = j.at("pid").get<std::int64_t>();
  b.run_id = j.at("run_id").get<std::string>();
  b.t_start_wall = j.at("t_start_wall").get<double>();
  b.elapsed = j.at("elapsed").get<double>();
  b.record_count = j.at("record_count").get<std::uint64_t>();
  const auto& ops = j.at("ops");
  b.ops.opens = ops.at("opens").get<std::uint64_t>();
  b.ops.closes = ops.at("closes").get<std::uint64_t>();
  b.ops.reads = ops.at("reads").get<std::uint64_t>();
  b.ops.writes = ops.at("writes").get<std::uint64_t>();
  b.ops.stdio_writes = ops.at("stdio_writes").get<std::uint64_t>();
  b.ops.reads_per_open = ops.at("reads_per_open").get<double>();
  b.bandwidth_read_mbps = j.at("bandwidth").at("read_mbps").get<double>();
  b.bandwidth_write_mbps = j.at("bandwidth").at("write_mbps").get<double>();
  b.read_sizes = distribution_from_json(j.at("read_sizes"));
  b.file_sizes = distribution_from_json(j.at("file_sizes"));
  if (!j.at("pattern").is_null()) {
    const auto& p = j.at("pattern");
    AccessPatternSummary s;
    s.reads = p.at("reads").get<std::uint64_t>();
    s.zero_reads = p.at("zero_reads").get<std::uint64_t>();
    s.seq_reads = p.at("seq_reads").get<std::uint64_t>();
    s.consec_reads = p.at("consec_reads").get<std::uint64_t>();
    s.frac_sequential = p.at("frac_sequential").get<double>();
    s.frac_consecutive = p.at("frac_consecutive").get<double>();
    s.frac_random = p.at("frac_random").get<double>();
    s.frac_zero = p.at("frac_zero").get<double>();
    b.pattern = s;
  }
  const auto& z = j.at("zero_read");
  b.zero_diag.zero_read_count = z.at("count").get<std::uint64_t>();
  b.zero_diag.affected_file_count = z.at("files").get<std::uint64_t>();
  b.zero_diag.finding = z.at("finding").get<std::string>() == "trailing_eof_reads"
                            ? ZeroReadFinding::kTrailingEofReads
                            : ZeroReadFinding::kNone;
  for (const auto& r : j.at("top_files")) {
    FileRow row;
    row.record_id = r.at("record_id").get<std::uint64_t>();
    row.path = r.at("path").get<std::string>();
    row.opens = r.at("opens").get<std::uint64_t>();
    row.reads = r.at("reads").get<std::uint64_t>();
    row.writes = r.at("writes").get<std::uint64_t>();
    row.bytes_read = r.at("bytes_read").get<std::uint64_t>();
    row.bytes_written = r.at("bytes_written").get<std::uint64_t>();
    b.top_files.push_back(std::move(row));
  }
  for (const auto& p : j.at("series"))
    b.series.push_back({p.at("window").get<std::uint64_t>(),
                        p.at("read_mbps").get<double>(),
                        p.at("write_mbps").get<double>()});
  if (!j.at("plan").is_null()) {
    const auto& p = j.at("plan");
    StagingPlan plan;
    plan.threshold = p.at("threshold").get<std::uint64_t>();
    plan.staged_bytes = p.at("staged_bytes").get<std::uint64_t>();
    plan.staged_file_count = p.at("staged_file_count").get<std::uint64_t>();
    plan.frac_bytes = p.at("frac_bytes").get<double>();
    plan.frac_files = p.at("frac_files").get<double>();
    if (!p.at("capacity").is_null())
      plan.capacity = p.at("capacity").get<std::uint64_t>();
    for (const auto& f : p.at("files"))
      plan.files.push_back(
          {f.at("path").get<std::string>(), f.at("size").get<std::uint64_t>()});
    b.plan = std::move(plan);
  }
  return b;
}

static std::string render_text(const ReportBundle& b) {
  std::ostringstream out;
  out << "iotrace report\n";
  out << "host " << b.hostname << "  pid " << b.pid;
  if (!b.run_id.empty()) out << "  run " << b.run_id;
  out << "\n";
  out << "window: " << fmt("%.6f", b.elapsed) << " s, " << b.record_count
      << " files\n\n";

  out << "-- POSIX bandwidth --\n";
  out << "read  " << fmt("%.2f", b.bandwidth_read_mbps) << " MB/s\n";
  out << "write " << fmt("%.2f", b.bandwidth_write_mbps) << " MB/s\n\n";

  out << "-- operations --\n";
  out << "opens " << b.ops.opens << "  closes " << b.ops.closes << "  reads "
      << b.ops.reads << "  writes " << b.ops.writes << "  stdio_writes "
      << b.ops.stdio_writes << "\n";
  out << "reads/open " << fmt("%.2f", b.ops.reads_per_open) << "\n";
  if (b.zero_diag.finding == ZeroReadFinding::kTrailingEofReads)
    out << "finding: trailing EOF reads (" << b.zero_diag.zero_read_count
        << " zero-length reads across " << b.zero_diag.affected_file_count
        << " files)\n";
  out << "\n";

  if (b.pattern) {
    const auto& p = *b.pattern;
    out << "-- access pattern --\n";
    out << "sequential " << fmt("%.1f", p.frac_sequential * 100)
        << "%  consecutive " << fmt("%.1f", p.frac_consecutive * 100)
        << "%  random " << fmt("%.1f", p.frac_random * 100) << "%  zero-length "
        << fmt("%.1f", p.frac_zero * 100) << "%\n\n";
  }

  auto render_dist = [&](const char* title, const SizeDistribution& d) {
    out << "-- " << title << " --\n";
    for (std::size_t i = 0; i < kSizeBuckets; ++i)
      out << "  " << bucket_label(i) << "\t" << d.buckets[i] << "\t"
          << fmt("%.1f", d.fraction(i) * 100) << "%\n";
    out << "  total " << d.total;
    if (d.unknown) out << " (unknown: " << d.unknown << ")";
    out << "\n\n";
  };
  render_dist("read size distribution", b.read_sizes);
  render_dist("file size distribution", b.file_sizes);

  if (!b.top_files.empty()) {
    out << "-- top files by bytes --\n";
    for (const auto& r : b.top_files)
      out << "  " << r.bytes_read << " rd, " << r.bytes_written << " wr, "
          << r.reads << " reads: " << r.path << "\n";
    out << "\n";
  }

  if (!b.series.empty()) {
    out << "-- bandwidth series (MB/s) --\n";
    for (const auto& p : b.series)
      out << "  window " << p.window_id << ": " << fmt("%.2f", p.read_mbps)
          << " rd, " << fmt("%.2f", p.write_mbps) << " wr\n";
    out << "\n";
  }

  if (b.plan) {
    const auto& p = *b.plan;
    out << "-- staging plan --\n";
    out << "threshold " << p.threshold << " B";
    if (p.capacity) out << ", capacity " << *p.capacity << " B";
    out << "\n";
    out << "stage " << p.staged_file_count << " files / " << p.staged_bytes
        << " bytes (" << fmt("%.1f", p.frac_bytes * 100) << "% of bytes, "
        << fmt("%.1f", p.frac_files * 100) << "% of files)\n\n";
  }
  return out.str();
}

std::string render_report(const ReportBundle& bundle, ReportFormat format) {
  if (format == ReportFormat::kJson) return report_to_json(bundle).dump(1) + "\n";
  return render_text(bundle);
}

}  // namespace iotrace
