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

#ifndef IOTRACE_HOOKS_HPP
#define IOTRACE_HOOKS_HPP

#include <sys/types.h>

#include <cstdio>
#include <span>

#include "iotrace/collector.hpp"
#include "iotrace/interpose.hpp"

namespace iotrace::hooks {

/// Points the wrappers at a store. With no active store (nullptr) every
/// wrapper is a pure pass-through. The store must outlive collection.
void set_active_store(RecordStore* store);
RecordStore* active_store();

/// Restricts which catalog symbols collect (IOTRACE_SYMBOLS semantics);
/// empty span re-enables the full catalog.
void set_enabled_symbols(std::span<const SymbolTarget> symbols);
bool symbol_enabled(const char* name);

/// Collection is disabled on this thread while a guard is alive. Used
/// around the profiler's own file I/O (log export, dataset bookkeeping)
/// so it never pollutes the records.
class SuppressionGuard {
 public:
  SuppressionGuard();
  ~SuppressionGuard();
  SuppressionGuard(const SuppressionGuard&) = delete;
  SuppressionGuard& operator=(const SuppressionGuard&) = delete;
};
bool collection_suppressed();

/// Eagerly resolves the real functions behind every catalog symbol.
/// Throws RealSymbolUnresolvable if a genuine implementation cannot be
/// found to forward to.
void resolve_real_symbols();

/// The record store owned by the preload library, when this process was
/// started with it (resolved through the library's exported accessor).
/// Null otherwise.
RecordStore* preload_store();

/// Wrapper address for every catalog symbol in `targets` — the map handed
/// to attach().
WrapperMap wrapper_table(std::span<const SymbolTarget> targets);

// The wrappers themselves. C calling convention; in preload builds these
// are re-exported under the real symbol names.
extern "C" {
int wrap_open(const char* path, int flags, ...);
int wrap_open64(const char* path, int flags, ...);
int wrap_creat(const char* path, mode_t mode);
int wrap_close(int fd);
ssize_t wrap_read(int fd, void* buf, size_t count);
ssize_t wrap_pread(int fd, void* buf, size_t count, off_t offset);
ssize_t wrap_pread64(int fd, void* buf, size_t count, off64_t offset);
ssize_t wrap_write(int fd, const void* buf, size_t count);
ssize_t wrap_pwrite(int fd, const void* buf, size_t count, off_t offset);
ssize_t wrap_pwrite64(int fd, const void* buf, size_t count, off64_t offset);
off_t wrap_lseek(int fd, off_t offset, int whence);
off64_t wrap_lseek64(int fd, off64_t offset, int whence);
FILE* wrap_fopen(const char* path, const char* mode);
FILE* wrap_fopen64(const char* path, const char* mode);
int wrap_fclose(FILE* stream);
size_t wrap_fread(void* ptr, size_t size, size_t nmemb, FILE* stream);
size_t wrap_fwrite(const void* ptr, size_t size, size_t nmemb, FILE* stream);
int wrap_fseek(FILE* stream, long offset, int whence);
}

}  // namespace iotrace::hooks

#endif  // IOTRACE_HOOKS_HPP
