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

#ifndef IOTRACE_INTERPOSE_HPP
#define IOTRACE_INTERPOSE_HPP

#include <map>
#include <span>
#include <string>
#include <vector>

namespace iotrace {

enum class SymbolFamily { kPosix, kStdio };

struct SymbolTarget {
  std::string name;
  SymbolFamily family = SymbolFamily::kPosix;

  friend bool operator==(const SymbolTarget&, const SymbolTarget&) = default;
};

/// The fixed symbol catalog: every call the instrumented layers observe.
/// Extend here, not ad hoc.
std::span<const SymbolTarget> symbol_catalog();

/// Catalog filtered by the IOTRACE_SYMBOLS env var (comma list). Unset or
/// empty means the full catalog.
std::vector<SymbolTarget> catalog_from_env();

/// One dynamic-relocation slot that resolves a target symbol.
struct RelocationSlot {
  std::string object_name;  // loaded-module path; "[exe]" resolved to its path
  SymbolTarget symbol;
  void** slot_address;
  bool read_only = false;  // slot page needs remapping before writes
};

struct ScanOptions {
  /// Substrings; when nonempty, only loaded objects whose name contains
  /// one of them are scanned. "[exe]" matches the main executable. The
  /// shared object containing this library's own wrappers is always
  /// skipped.
  std::vector<std::string> object_filter;
};

/// Walks every loaded object's dynamic relocations and returns the slots
/// whose symbol matches a target: JUMP_SLOT entries, falling back to a
/// GLOB_DAT entry only when an object has no JUMP_SLOT for that symbol.
/// At most one slot per (object, symbol); two scans return identical sets.
/// Throws RelocationUnreadable when no dynamic relocation metadata is
/// readable (static binaries).
std::vector<RelocationSlot> scan_relocations(std::span<const SymbolTarget> targets,
                                             const ScanOptions& opts = {});

struct PatchRecord {
  std::string object_name;
  SymbolTarget symbol;
  void** slot_address;
  void* original_value;
  void* replacement_value;
  bool slot_read_only = false;  // page was RELRO-protected at patch time
};

enum class AttachMode { kDetached, kPreload, kRuntime };

struct AttachmentState {
  AttachMode mode = AttachMode::kDetached;
  std::vector<PatchRecord> patches;
};

/// symbol name -> wrapper function address
using WrapperMap = std::map<std::string, void*, std::less<>>;

/// Rewrites every matched slot to its wrapper, capturing original values.
/// Each slot write is a single atomic word update, so application threads
/// may keep doing I/O during attachment. Throws AlreadyAttached if a
/// runtime attachment is active, SlotWriteDenied (after rolling back) if
/// a relocation page cannot be made writable. Targets without a matching
/// slot are skipped; an empty match leaves the state DETACHED.
AttachmentState attach(std::span<const SymbolTarget> targets,
                       const WrapperMap& wrappers, const ScanOptions& opts = {});

/// Restores every patched slot to its exact prior value and returns the
/// DETACHED state. Throws NotAttached unless state.mode is RUNTIME.
AttachmentState detach(AttachmentState state);

/// True while a runtime attachment is active in this process.
bool runtime_attached();

}  // namespace iotrace

#endif  // IOTRACE_INTERPOSE_HPP
