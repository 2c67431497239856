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

#include "iotrace/collector.hpp"

#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>

#include "iotrace/clock.hpp"
#include "iotrace/hash.hpp"

namespace iotrace {

std::string hostname() {
  char buf[256] = {0};
  if (gethostname(buf, sizeof(buf) - 1) != 0) return "unknown";
  return buf;
}

std::string canonical_path(std::string_view path) {
  if (path.empty()) return std::string(path);
  if (path.front() == '<') return std::string(path);  // pseudo-path
  namespace fs = std::filesystem;
  fs::path p(path);
  std::error_code ec;
  if (p.is_relative()) {
    fs::path cwd = fs::current_path(ec);
    if (!ec) p = cwd / p;
  }
  return p.lexically_normal().string();
}

std::string bucket_label(std::size_t bucket) {
  static const char* kNames[] = {"0",    "100", "1K",   "10K", "100K",
                                 "1M",   "4M",  "10M",  "100M", "1G"};
  if (bucket == 0) return "[0,100]";
  if (bucket >= kSizeBuckets - 1) return "(1G,inf)";
  return std::string("(") + kNames[bucket] + "," + kNames[bucket + 1] + "]";
}

bool CounterSet::all_zero() const { return *this == CounterSet{}; }

CounterSet counter_delta(const CounterSet& stop, const CounterSet& start) {
  CounterSet d;
  d.opens = stop.opens - start.opens;
  d.closes = stop.closes - start.closes;
  d.reads = stop.reads - start.reads;
  d.writes = stop.writes - start.writes;
  d.bytes_read = stop.bytes_read - start.bytes_read;
  d.bytes_written = stop.bytes_written - start.bytes_written;
  d.zero_reads = stop.zero_reads - start.zero_reads;
  d.seq_reads = stop.seq_reads - start.seq_reads;
  d.consec_reads = stop.consec_reads - start.consec_reads;
  d.seq_writes = stop.seq_writes - start.seq_writes;
  d.consec_writes = stop.consec_writes - start.consec_writes;
  for (std::size_t i = 0; i < kSizeBuckets; ++i) {
    d.read_size_hist[i] = stop.read_size_hist[i] - start.read_size_hist[i];
    d.write_size_hist[i] = stop.write_size_hist[i] - start.write_size_hist[i];
  }
  d.stdio_opens = stop.stdio_opens - start.stdio_opens;
  d.stdio_reads = stop.stdio_reads - start.stdio_reads;
  d.stdio_writes = stop.stdio_writes - start.stdio_writes;
  d.stdio_bytes_written = stop.stdio_bytes_written - start.stdio_bytes_written;
  d.max_read_offset = stop.max_read_offset;
  d.max_write_offset = stop.max_write_offset;
  d.t_first_open = stop.t_first_open;
  d.t_first_read = stop.t_first_read;
  d.t_last_read = stop.t_last_read;
  d.t_first_write = stop.t_first_write;
  d.t_last_write = stop.t_last_write;
  return d;
}

void accumulate(CounterSet& total, const CounterSet& delta) {
  total.opens += delta.opens;
  total.closes += delta.closes;
  total.reads += delta.reads;
  total.writes += delta.writes;
  total.bytes_read += delta.bytes_read;
  total.bytes_written += delta.bytes_written;
  total.zero_reads += delta.zero_reads;
  total.seq_reads += delta.seq_reads;
  total.consec_reads += delta.consec_reads;
  total.seq_writes += delta.seq_writes;
  total.consec_writes += delta.consec_writes;
  for (std::size_t i = 0; i < kSizeBuckets; ++i) {
    total.read_size_hist[i] += delta.read_size_hist[i];
    total.write_size_hist[i] += delta.write_size_hist[i];
  }
  total.stdio_opens += delta.stdio_opens;
  total.stdio_reads += delta.stdio_reads;
  total.stdio_writes += delta.stdio_writes;
  total.stdio_bytes_written += delta.stdio_bytes_written;
  total.max_read_offset = std::max(total.max_read_offset, delta.max_read_offset);
  total.max_write_offset = std::max(total.max_write_offset, delta.max_write_offset);
  auto min_nonzero = [](double a, double b) {
    if (a == 0) return b;
    if (b == 0) return a;
    return std::min(a, b);
  };
  total.t_first_open = min_nonzero(total.t_first_open, delta.t_first_open);
  total.t_first_read = min_nonzero(total.t_first_read, delta.t_first_read);
  total.t_first_write = min_nonzero(total.t_first_write, delta.t_first_write);
  total.t_last_read = std::max(total.t_last_read, delta.t_last_read);
  total.t_last_write = std::max(total.t_last_write, delta.t_last_write);
}

const FileRecord* Snapshot::find(std::uint64_t record_id) const {
  auto it = records.find(record_id);
  return it == records.end() ? nullptr : it->second.get();
}

const FileRecord* Snapshot::find_path(std::string_view canonical) const {
  for (const auto& [id, rec] : records)
    if (rec->path == canonical) return rec.get();
  return nullptr;
}

bool same_records(const Snapshot& a, const Snapshot& b) {
  if (a.records.size() != b.records.size()) return false;
  for (auto ita = a.records.begin(), itb = b.records.begin();
       ita != a.records.end(); ++ita, ++itb) {
    if (ita->first != itb->first) return false;
    if (!(*ita->second == *itb->second)) return false;
  }
  return true;
}

StoreConfig StoreConfig::from_env() {
  StoreConfig cfg;
  if (const char* v = std::getenv("IOTRACE_DXT"))
    cfg.dxt_enabled = std::string_view(v) != "0";
  if (const char* v = std::getenv("IOTRACE_DXT_CAPACITY")) {
    char* end = nullptr;
    unsigned long long cap = std::strtoull(v, &end, 10);
    if (end && *end == '\0' && cap > 0)
      cfg.dxt_capacity = static_cast<std::uint32_t>(cap);
  }
  return cfg;
}

RecordStore::RecordStore(StoreConfig cfg) : cfg_(cfg) {}

RecordStore::RecordSlot& RecordStore::record_for_path_locked(std::string_view path) {
  std::string canon = canonical_path(path);
  auto it = by_path_.find(canon);
  if (it != by_path_.end()) return it->second;

  std::uint64_t id = fnv1a64(canon);
  while (id_to_path_.count(id)) ++id;  // collision: probe, compare by full path
  id_to_path_.emplace(id, canon);

  RecordSlot slot;
  slot.live = std::make_shared<FileRecord>();
  slot.live->record_id = id;
  slot.live->path = canon;
  return by_path_.emplace(std::move(canon), std::move(slot)).first->second;
}

RecordStore::FdState& RecordStore::fd_state_locked(int fd) {
  auto it = fds_.find(fd);
  if (it != fds_.end()) return it->second;
  FdState st;
  st.slot = &record_for_path_locked(kAnonymousPath);
  return fds_.emplace(fd, st).first->second;
}

std::uint64_t RecordStore::on_open(std::string_view path, int fd, double t,
                                   Family family) {
  std::lock_guard lock(mu_);
  RecordSlot& slot = record_for_path_locked(path);
  CounterSet& c = slot.live->counters;
  if (family == Family::kStdio)
    ++c.stdio_opens;
  else
    ++c.opens;
  if (c.t_first_open == 0) c.t_first_open = t;
  slot.dirty = true;
  if (fd >= 0) fds_[fd] = FdState{&slot, 0, {}, {}};
  return slot.live->record_id;
}

void RecordStore::on_close(int fd, double /*t*/, Family /*family*/) {
  std::lock_guard lock(mu_);
  FdState& st = fd_state_locked(fd);
  ++st.slot->live->counters.closes;
  st.slot->dirty = true;
  fds_.erase(fd);
}

void RecordStore::on_read(int fd, std::optional<std::uint64_t> explicit_offset,
                          std::uint64_t length_returned, double t0, double t1,
                          Family family) {
  std::lock_guard lock(mu_);
  FdState& st = fd_state_locked(fd);
  FileRecord& rec = *st.slot->live;
  CounterSet& c = rec.counters;
  st.slot->dirty = true;

  std::uint64_t off = explicit_offset.value_or(st.offset);

  if (family == Family::kStdio) {
    ++c.stdio_reads;
    c.max_read_offset = std::max(c.max_read_offset, off + length_returned);
    if (!explicit_offset) st.offset = off + length_returned;
    st.prev_read_end = off + length_returned;
    return;
  }

  ++c.reads;
  c.bytes_read += length_returned;
  if (length_returned == 0) ++c.zero_reads;
  ++c.read_size_hist[bucket_for(length_returned)];

  // Zero-length reads count as consecutive; that keeps the trailing-EOF
  // read loop fully sequential in the pattern summary.
  if (length_returned == 0) {
    ++c.consec_reads;
    ++c.seq_reads;
  } else {
    switch (classify_access(st.prev_read_end, off)) {
      case AccessClass::kConsecutive:
        ++c.consec_reads;
        [[fallthrough]];
      case AccessClass::kSequential:
        ++c.seq_reads;
        break;
      case AccessClass::kRandom:
        break;
    }
  }
  st.prev_read_end = off + length_returned;
  c.max_read_offset = std::max(c.max_read_offset, off + length_returned);
  if (!explicit_offset) st.offset = off + length_returned;

  if (c.t_first_read == 0) c.t_first_read = t0;
  c.t_last_read = std::max(c.t_last_read, t1);

  if (cfg_.dxt_enabled) {
    if (rec.segments.size() < cfg_.dxt_capacity)
      rec.segments.push_back({DxtSegment::Kind::kRead, off, length_returned, t0, t1});
    else
      rec.segments_truncated = true;
  }
}

void RecordStore::on_write(int fd, std::optional<std::uint64_t> explicit_offset,
                           std::uint64_t length, double t0, double t1,
                           Family family) {
  std::lock_guard lock(mu_);
  FdState& st = fd_state_locked(fd);
  FileRecord& rec = *st.slot->live;
  CounterSet& c = rec.counters;
  st.slot->dirty = true;

  std::uint64_t off = explicit_offset.value_or(st.offset);

  if (family == Family::kStdio) {
    ++c.stdio_writes;
    c.stdio_bytes_written += length;
    c.max_write_offset = std::max(c.max_write_offset, off + length);
    if (!explicit_offset) st.offset = off + length;
    st.prev_write_end = off + length;
    return;
  }

  ++c.writes;
  c.bytes_written += length;
  ++c.write_size_hist[bucket_for(length)];

  if (length == 0) {
    ++c.consec_writes;
    ++c.seq_writes;
  } else {
    switch (classify_access(st.prev_write_end, off)) {
      case AccessClass::kConsecutive:
        ++c.consec_writes;
        [[fallthrough]];
      case AccessClass::kSequential:
        ++c.seq_writes;
        break;
      case AccessClass::kRandom:
        break;
    }
  }
  st.prev_write_end = off + length;
  c.max_write_offset = std::max(c.max_write_offset, off + length);
  if (!explicit_offset) st.offset = off + length;

  if (c.t_first_write == 0) c.t_first_write = t0;
  c.t_last_write = std::max(c.t_last_write, t1);

  if (cfg_.dxt_enabled) {
    if (rec.segments.size() < cfg_.dxt_capacity)
      rec.segments.push_back({DxtSegment::Kind::kWrite, off, length, t0, t1});
    else
      rec.segments_truncated = true;
  }
}

void RecordStore::on_seek(int fd, std::uint64_t new_offset) {
  std::lock_guard lock(mu_);
  fd_state_locked(fd).offset = new_offset;
}

Snapshot RecordStore::snapshot() {
  std::lock_guard lock(mu_);
  Snapshot snap;
  snap.t_wall = wall_now();
  snap.t_mono = mono_now();
  for (auto& [path, slot] : by_path_) {
    if (slot.dirty || !slot.published) {
      slot.published = std::make_shared<const FileRecord>(*slot.live);
      slot.dirty = false;
    }
    snap.records.emplace(slot.published->record_id, slot.published);
  }
  return snap;
}

}  // namespace iotrace
