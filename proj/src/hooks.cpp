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

#include "iotrace/hooks.hpp"

#include <dlfcn.h>
#include <fcntl.h>

#include <atomic>
#include <cerrno>
#include <cstdarg>
#include <cstring>

#include "iotrace/clock.hpp"
#include "iotrace/errors.hpp"

#ifndef O_TMPFILE
#define O_TMPFILE 0
#endif

namespace iotrace::hooks {

namespace {

enum SymbolId : int {
  kOpen, kOpen64, kCreat, kClose, kRead, kPread, kPread64,
  kWrite, kPwrite, kPwrite64, kLseek, kLseek64,
  kFopen, kFopen64, kFclose, kFread, kFwrite, kFseek,
  kSymbolCount
};

constexpr const char* kSymbolNames[kSymbolCount] = {
    "open", "open64", "creat", "close", "read", "pread", "pread64",
    "write", "pwrite", "pwrite64", "lseek", "lseek64",
    "fopen", "fopen64", "fclose", "fread", "fwrite", "fseek"};

std::atomic<RecordStore*> g_store{nullptr};
std::atomic<bool> g_symbol_enabled[kSymbolCount];
std::atomic<void*> g_real[kSymbolCount];
thread_local int t_suppress_depth = 0;

struct EnableAllAtStartup {
  EnableAllAtStartup() {
    for (auto& f : g_symbol_enabled) f.store(true, std::memory_order_relaxed);
  }
} g_enable_all;

bool same_object(void* a, void* b) {
  Dl_info ia{}, ib{};
  if (!dladdr(a, &ia) || !dladdr(b, &ib)) return false;
  return ia.dli_fname && ib.dli_fname && std::strcmp(ia.dli_fname, ib.dli_fname) == 0;
}

// Resolve the genuine implementation to forward to. RTLD_NEXT is correct
// both from a preload library and from the main executable; the
// RTLD_DEFAULT fallback is rejected if it lands back in our own object.
void* resolve(int id, void* self) noexcept {
  void* cached = g_real[id].load(std::memory_order_acquire);
  if (cached) return cached;
  const char* name = kSymbolNames[id];
  void* p = dlsym(RTLD_NEXT, name);
  if (!p || p == self || same_object(p, self)) {
    void* q = dlsym(RTLD_DEFAULT, name);
    p = (q && q != self && !same_object(q, self)) ? q : nullptr;
  }
  if (p) g_real[id].store(p, std::memory_order_release);
  return p;
}

inline RecordStore* collecting(int id) {
  if (t_suppress_depth > 0) return nullptr;
  if (!g_symbol_enabled[id].load(std::memory_order_relaxed)) return nullptr;
  return g_store.load(std::memory_order_acquire);
}

}  // namespace

void set_active_store(RecordStore* store) {
  g_store.store(store, std::memory_order_release);
}

RecordStore* active_store() { return g_store.load(std::memory_order_acquire); }

void set_enabled_symbols(std::span<const SymbolTarget> symbols) {
  if (symbols.empty()) {
    for (auto& f : g_symbol_enabled) f.store(true, std::memory_order_relaxed);
    return;
  }
  for (int i = 0; i < kSymbolCount; ++i) {
    bool on = false;
    for (const auto& t : symbols)
      if (t.name == kSymbolNames[i]) on = true;
    g_symbol_enabled[i].store(on, std::memory_order_relaxed);
  }
}

bool symbol_enabled(const char* name) {
  for (int i = 0; i < kSymbolCount; ++i)
    if (std::strcmp(name, kSymbolNames[i]) == 0)
      return g_symbol_enabled[i].load(std::memory_order_relaxed);
  return false;
}

SuppressionGuard::SuppressionGuard() { ++t_suppress_depth; }
SuppressionGuard::~SuppressionGuard() { --t_suppress_depth; }

bool collection_suppressed() { return t_suppress_depth > 0; }

void resolve_real_symbols() {
  static void* const kSelf[kSymbolCount] = {
      reinterpret_cast<void*>(&wrap_open),    reinterpret_cast<void*>(&wrap_open64),
      reinterpret_cast<void*>(&wrap_creat),   reinterpret_cast<void*>(&wrap_close),
      reinterpret_cast<void*>(&wrap_read),    reinterpret_cast<void*>(&wrap_pread),
      reinterpret_cast<void*>(&wrap_pread64), reinterpret_cast<void*>(&wrap_write),
      reinterpret_cast<void*>(&wrap_pwrite),  reinterpret_cast<void*>(&wrap_pwrite64),
      reinterpret_cast<void*>(&wrap_lseek),   reinterpret_cast<void*>(&wrap_lseek64),
      reinterpret_cast<void*>(&wrap_fopen),   reinterpret_cast<void*>(&wrap_fopen64),
      reinterpret_cast<void*>(&wrap_fclose),  reinterpret_cast<void*>(&wrap_fread),
      reinterpret_cast<void*>(&wrap_fwrite),  reinterpret_cast<void*>(&wrap_fseek)};
  for (int i = 0; i < kSymbolCount; ++i)
    if (!resolve(i, kSelf[i]))
      throw RealSymbolUnresolvable(std::string("cannot resolve real '") +
                                   kSymbolNames[i] + "'");
}

RecordStore* preload_store() {
  using fn_t = RecordStore* (*)();
  auto* fn =
      reinterpret_cast<fn_t>(dlsym(RTLD_DEFAULT, "iotrace_preload_store"));
  return fn ? fn() : nullptr;
}

WrapperMap wrapper_table(std::span<const SymbolTarget> targets) {
  static const std::pair<const char*, void*> kAll[] = {
      {"open", reinterpret_cast<void*>(&wrap_open)},
      {"open64", reinterpret_cast<void*>(&wrap_open64)},
      {"creat", reinterpret_cast<void*>(&wrap_creat)},
      {"close", reinterpret_cast<void*>(&wrap_close)},
      {"read", reinterpret_cast<void*>(&wrap_read)},
      {"pread", reinterpret_cast<void*>(&wrap_pread)},
      {"pread64", reinterpret_cast<void*>(&wrap_pread64)},
      {"write", reinterpret_cast<void*>(&wrap_write)},
      {"pwrite", reinterpret_cast<void*>(&wrap_pwrite)},
      {"pwrite64", reinterpret_cast<void*>(&wrap_pwrite64)},
      {"lseek", reinterpret_cast<void*>(&wrap_lseek)},
      {"lseek64", reinterpret_cast<void*>(&wrap_lseek64)},
      {"fopen", reinterpret_cast<void*>(&wrap_fopen)},
      {"fopen64", reinterpret_cast<void*>(&wrap_fopen64)},
      {"fclose", reinterpret_cast<void*>(&wrap_fclose)},
      {"fread", reinterpret_cast<void*>(&wrap_fread)},
      {"fwrite", reinterpret_cast<void*>(&wrap_fwrite)},
      {"fseek", reinterpret_cast<void*>(&wrap_fseek)}};
  WrapperMap map;
  for (const auto& t : targets)
    for (const auto& [name, fn] : kAll)
      if (t.name == name) map.emplace(name, fn);
  return map;
}

extern "C" {

#define REAL(id, type, self)                                     \
  auto* real = reinterpret_cast<type>(resolve(id, reinterpret_cast<void*>(self))); \
  if (!real) {                                                   \
    errno = ENOSYS;                                              \
    return -1;                                                   \
  }

int wrap_open(const char* path, int flags, ...) {
  mode_t mode = 0;
  if (flags & (O_CREAT | O_TMPFILE)) {
    va_list ap;
    va_start(ap, flags);
    mode = va_arg(ap, mode_t);
    va_end(ap);
  }
  using fn_t = int (*)(const char*, int, ...);
  REAL(kOpen, fn_t, &wrap_open)
  double t0 = mono_now();
  int fd = real(path, flags, mode);
  int saved = errno;
  if (fd >= 0)
    if (RecordStore* s = collecting(kOpen)) s->on_open(path, fd, t0, Family::kPosix);
  errno = saved;
  return fd;
}

int wrap_open64(const char* path, int flags, ...) {
  mode_t mode = 0;
  if (flags & (O_CREAT | O_TMPFILE)) {
    va_list ap;
    va_start(ap, flags);
    mode = va_arg(ap, mode_t);
    va_end(ap);
  }
  using fn_t = int (*)(const char*, int, ...);
  REAL(kOpen64, fn_t, &wrap_open64)
  double t0 = mono_now();
  int fd = real(path, flags, mode);
  int saved = errno;
  if (fd >= 0)
    if (RecordStore* s = collecting(kOpen64)) s->on_open(path, fd, t0, Family::kPosix);
  errno = saved;
  return fd;
}

int wrap_creat(const char* path, mode_t mode) {
  using fn_t = int (*)(const char*, mode_t);
  REAL(kCreat, fn_t, &wrap_creat)
  double t0 = mono_now();
  int fd = real(path, mode);
  int saved = errno;
  if (fd >= 0)
    if (RecordStore* s = collecting(kCreat)) s->on_open(path, fd, t0, Family::kPosix);
  errno = saved;
  return fd;
}

int wrap_close(int fd) {
  using fn_t = int (*)(int);
  REAL(kClose, fn_t, &wrap_close)
  double t0 = mono_now();
  int ret = real(fd);
  int saved = errno;
  if (ret == 0)
    if (RecordStore* s = collecting(kClose)) s->on_close(fd, t0, Family::kPosix);
  errno = saved;
  return ret;
}

ssize_t wrap_read(int fd, void* buf, size_t count) {
  using fn_t = ssize_t (*)(int, void*, size_t);
  REAL(kRead, fn_t, &wrap_read)
  double t0 = mono_now();
  ssize_t ret = real(fd, buf, count);
  double t1 = mono_now();
  int saved = errno;
  if (ret >= 0)
    if (RecordStore* s = collecting(kRead))
      s->on_read(fd, std::nullopt, static_cast<std::uint64_t>(ret), t0, t1,
                 Family::kPosix);
  errno = saved;
  return ret;
}

ssize_t wrap_pread(int fd, void* buf, size_t count, off_t offset) {
  using fn_t = ssize_t (*)(int, void*, size_t, off_t);
  REAL(kPread, fn_t, &wrap_pread)
  double t0 = mono_now();
  ssize_t ret = real(fd, buf, count, offset);
  double t1 = mono_now();
  int saved = errno;
  if (ret >= 0)
    if (RecordStore* s = collecting(kPread))
      s->on_read(fd, static_cast<std::uint64_t>(offset),
                 static_cast<std::uint64_t>(ret), t0, t1, Family::kPosix);
  errno = saved;
  return ret;
}

ssize_t wrap_pread64(int fd, void* buf, size_t count, off64_t offset) {
  using fn_t = ssize_t (*)(int, void*, size_t, off64_t);
  REAL(kPread64, fn_t, &wrap_pread64)
  double t0 = mono_now();
  ssize_t ret = real(fd, buf, count, offset);
  double t1 = mono_now();
  int saved = errno;
  if (ret >= 0)
    if (RecordStore* s = collecting(kPread64))
      s->on_read(fd, static_cast<std::uint64_t>(offset),
                 static_cast<std::uint64_t>(ret), t0, t1, Family::kPosix);
  errno = saved;
  return ret;
}

ssize_t wrap_write(int fd, const void* buf, size_t count) {
  using fn_t = ssize_t (*)(int, const void*, size_t);
  REAL(kWrite, fn_t, &wrap_write)
  double t0 = mono_now();
  ssize_t ret = real(fd, buf, count);
  double t1 = mono_now();
  int saved = errno;
  if (ret >= 0)
    if (RecordStore* s = collecting(kWrite))
      s->on_write(fd, std::nullopt, static_cast<std::uint64_t>(ret), t0, t1,
                  Family::kPosix);
  errno = saved;
  return ret;
}

ssize_t wrap_pwrite(int fd, const void* buf, size_t count, off_t offset) {
  using fn_t = ssize_t (*)(int, const void*, size_t, off_t);
  REAL(kPwrite, fn_t, &wrap_pwrite)
  double t0 = mono_now();
  ssize_t ret = real(fd, buf, count, offset);
  double t1 = mono_now();
  int saved = errno;
  if (ret >= 0)
    if (RecordStore* s = collecting(kPwrite))
      s->on_write(fd, static_cast<std::uint64_t>(offset),
                  static_cast<std::uint64_t>(ret), t0, t1, Family::kPosix);
  errno = saved;
  return ret;
}

ssize_t wrap_pwrite64(int fd, const void* buf, size_t count, off64_t offset) {
  using fn_t = ssize_t (*)(int, const void*, size_t, off64_t);
  REAL(kPwrite64, fn_t, &wrap_pwrite64)
  double t0 = mono_now();
  ssize_t ret = real(fd, buf, count, offset);
  double t1 = mono_now();
  int saved = errno;
  if (ret >= 0)
    if (RecordStore* s = collecting(kPwrite64))
      s->on_write(fd, static_cast<std::uint64_t>(offset),
                  static_cast<std::uint64_t>(ret), t0, t1, Family::kPosix);
  errno = saved;
  return ret;
}

off_t wrap_lseek(int fd, off_t offset, int whence) {
  using fn_t = off_t (*)(int, off_t, int);
  REAL(kLseek, fn_t, &wrap_lseek)
  off_t ret = real(fd, offset, whence);
  int saved = errno;
  if (ret >= 0)
    if (RecordStore* s = collecting(kLseek))
      s->on_seek(fd, static_cast<std::uint64_t>(ret));
  errno = saved;
  return ret;
}

off64_t wrap_lseek64(int fd, off64_t offset, int whence) {
  using fn_t = off64_t (*)(int, off64_t, int);
  REAL(kLseek64, fn_t, &wrap_lseek64)
  off64_t ret = real(fd, offset, whence);
  int saved = errno;
  if (ret >= 0)
    if (RecordStore* s = collecting(kLseek64))
      s->on_seek(fd, static_cast<std::uint64_t>(ret));
  errno = saved;
  return ret;
}

FILE* wrap_fopen(const char* path, const char* mode) {
  using fn_t = FILE* (*)(const char*, const char*);
  auto* real = reinterpret_cast<fn_t>(resolve(kFopen, reinterpret_cast<void*>(&wrap_fopen)));
  if (!real) {
    errno = ENOSYS;
    return nullptr;
  }
  double t0 = mono_now();
  FILE* f = real(path, mode);
  int saved = errno;
  if (f)
    if (RecordStore* s = collecting(kFopen))
      s->on_open(path, fileno(f), t0, Family::kStdio);
  errno = saved;
  return f;
}

FILE* wrap_fopen64(const char* path, const char* mode) {
  using fn_t = FILE* (*)(const char*, const char*);
  auto* real = reinterpret_cast<fn_t>(resolve(kFopen64, reinterpret_cast<void*>(&wrap_fopen64)));
  if (!real) {
    errno = ENOSYS;
    return nullptr;
  }
  double t0 = mono_now();
  FILE* f = real(path, mode);
  int saved = errno;
  if (f)
    if (RecordStore* s = collecting(kFopen64))
      s->on_open(path, fileno(f), t0, Family::kStdio);
  errno = saved;
  return f;
}

int wrap_fclose(FILE* stream) {
  using fn_t = int (*)(FILE*);
  REAL(kFclose, fn_t, &wrap_fclose)
  int fd = stream ? fileno(stream) : -1;
  double t0 = mono_now();
  int ret = real(stream);
  int saved = errno;
  if (ret == 0 && fd >= 0)
    if (RecordStore* s = collecting(kFclose)) s->on_close(fd, t0, Family::kStdio);
  errno = saved;
  return ret;
}

size_t wrap_fread(void* ptr, size_t size, size_t nmemb, FILE* stream) {
  using fn_t = size_t (*)(void*, size_t, size_t, FILE*);
  auto* real = reinterpret_cast<fn_t>(resolve(kFread, reinterpret_cast<void*>(&wrap_fread)));
  if (!real) return 0;
  double t0 = mono_now();
  size_t ret = real(ptr, size, nmemb, stream);
  double t1 = mono_now();
  int saved = errno;
  if (stream)
    if (RecordStore* s = collecting(kFread))
      s->on_read(fileno(stream), std::nullopt,
                 static_cast<std::uint64_t>(ret) * size, t0, t1, Family::kStdio);
  errno = saved;
  return ret;
}

size_t wrap_fwrite(const void* ptr, size_t size, size_t nmemb, FILE* stream) {
  using fn_t = size_t (*)(const void*, size_t, size_t, FILE*);
  auto* real = reinterpret_cast<fn_t>(resolve(kFwrite, reinterpret_cast<void*>(&wrap_fwrite)));
  if (!real) return 0;
  double t0 = mono_now();
  size_t ret = real(ptr, size, nmemb, stream);
  double t1 = mono_now();
  int saved = errno;
  if (stream)
    if (RecordStore* s = collecting(kFwrite))
      s->on_write(fileno(stream), std::nullopt,
                  static_cast<std::uint64_t>(ret) * size, t0, t1, Family::kStdio);
  errno = saved;
  return ret;
}

int wrap_fseek(FILE* stream, long offset, int whence) {
  using fn_t = int (*)(FILE*, long, int);
  REAL(kFseek, fn_t, &wrap_fseek)
  int ret = real(stream, offset, whence);
  int saved = errno;
  if (ret == 0 && stream) {
    if (RecordStore* s = collecting(kFseek)) {
      long pos = ftell(stream);
      if (pos >= 0) s->on_seek(fileno(stream), static_cast<std::uint64_t>(pos));
    }
  }
  errno = saved;
  return ret;
}

#undef REAL

}  // extern "C"

}  // namespace iotrace::hooks
