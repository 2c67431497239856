/*
 * Copyright 2026 The iotrace Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 * Exports the symbol catalog under the real libc names so LD_PRELOAD
 * resolves application calls here. Each shim forwards to the shared
 * wrapper bodies; C keeps the variadic and exception-spec plumbing
 * painless.
 */

#define _GNU_SOURCE
#include <fcntl.h>
#include <stdarg.h>
#include <stdio.h>
#include <sys/types.h>

#ifndef O_TMPFILE
#define O_TMPFILE 0
#endif

extern int wrap_open(const char* path, int flags, ...);
extern int wrap_open64(const char* path, int flags, ...);
extern int wrap_creat(const char* path, mode_t mode);
extern int wrap_close(int fd);
extern ssize_t wrap_read(int fd, void* buf, size_t count);
extern ssize_t wrap_pread(int fd, void* buf, size_t count, off_t offset);
extern ssize_t wrap_pread64(int fd, void* buf, size_t count, off64_t offset);
extern ssize_t wrap_write(int fd, const void* buf, size_t count);
extern ssize_t wrap_pwrite(int fd, const void* buf, size_t count, off_t offset);
extern ssize_t wrap_pwrite64(int fd, const void* buf, size_t count, off64_t offset);
extern off_t wrap_lseek(int fd, off_t offset, int whence);
extern off64_t wrap_lseek64(int fd, off64_t offset, int whence);
extern FILE* wrap_fopen(const char* path, const char* mode);
extern FILE* wrap_fopen64(const char* path, const char* mode);
extern int wrap_fclose(FILE* stream);
extern size_t wrap_fread(void* ptr, size_t size, size_t nmemb, FILE* stream);
extern size_t wrap_fwrite(const void* ptr, size_t size, size_t nmemb, FILE* stream);
extern int wrap_fseek(FILE* stream, long offset, int whence);

int open(const char* path, int flags, ...) {
  mode_t mode = 0;
  if (flags & (O_CREAT | O_TMPFILE)) {
    va_list ap;
    va_start(ap, flags);
    mode = va_arg(ap, mode_t);
    va_end(ap);
  }
  return wrap_open(path, flags, mode);
}

int open64(const char* path, int flags, ...) {
  mode_t mode = 0;
  if (flags & (O_CREAT | O_TMPFILE)) {
    va_list ap;
    va_start(ap, flags);
    mode = va_arg(ap, mode_t);
    va_end(ap);
  }
  return wrap_open64(path, flags, mode);
}

int creat(const char* path, mode_t mode) { return wrap_creat(path, mode); }

int close(int fd) { return wrap_close(fd); }

ssize_t read(int fd, void* buf, size_t count) { return wrap_read(fd, buf, count); }

ssize_t pread(int fd, void* buf, size_t count, off_t offset) {
  return wrap_pread(fd, buf, count, offset);
}

ssize_t pread64(int fd, void* buf, size_t count, off64_t offset) {
  return wrap_pread64(fd, buf, count, offset);
}

ssize_t write(int fd, const void* buf, size_t count) {
  return wrap_write(fd, buf, count);
}

ssize_t pwrite(int fd, const void* buf, size_t count, off_t offset) {
  return wrap_pwrite(fd, buf, count, offset);
}

ssize_t pwrite64(int fd, const void* buf, size_t count, off64_t offset) {
  return wrap_pwrite64(fd, buf, count, offset);
}

off_t lseek(int fd, off_t offset, int whence) {
  return wrap_lseek(fd, offset, whence);
}

off64_t lseek64(int fd, off64_t offset, int whence) {
  return wrap_lseek64(fd, offset, whence);
}

FILE* fopen(const char* path, const char* mode) { return wrap_fopen(path, mode); }

FILE* fopen64(const char* path, const char* mode) {
  return wrap_fopen64(path, mode);
}

int fclose(FILE* stream) { return wrap_fclose(stream); }

size_t fread(void* ptr, size_t size, size_t nmemb, FILE* stream) {
  return wrap_fread(ptr, size, nmemb, stream);
}

size_t fwrite(const void* ptr, size_t size, size_t nmemb, FILE* stream) {
  return wrap_fwrite(ptr, size, nmemb, stream);
}

int fseek(FILE* stream, long offset, int whence) {
  return wrap_fseek(stream, offset, whence);
}
