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

#include "iotrace/interpose.hpp"

#include <dlfcn.h>
#include <elf.h>
#include <link.h>
#include <sys/mman.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cstring>
#include <mutex>
#include <set>

#include "iotrace/errors.hpp"

namespace iotrace {

namespace {

#if defined(__x86_64__)
constexpr std::uint32_t kJumpSlotReloc = R_X86_64_JUMP_SLOT;
constexpr std::uint32_t kGlobDatReloc = R_X86_64_GLOB_DAT;
#elif defined(__aarch64__)
constexpr std::uint32_t kJumpSlotReloc = R_AARCH64_JUMP_SLOT;
constexpr std::uint32_t kGlobDatReloc = R_AARCH64_GLOB_DAT;
#else
#error "runtime attachment supports x86_64 and aarch64 ELF only"
#endif

const SymbolTarget kCatalog[] = {
    {"open", SymbolFamily::kPosix},    {"open64", SymbolFamily::kPosix},
    {"creat", SymbolFamily::kPosix},   {"close", SymbolFamily::kPosix},
    {"read", SymbolFamily::kPosix},    {"pread", SymbolFamily::kPosix},
    {"pread64", SymbolFamily::kPosix}, {"write", SymbolFamily::kPosix},
    {"pwrite", SymbolFamily::kPosix},  {"pwrite64", SymbolFamily::kPosix},
    {"lseek", SymbolFamily::kPosix},   {"lseek64", SymbolFamily::kPosix},
    {"fopen", SymbolFamily::kStdio},   {"fopen64", SymbolFamily::kStdio},
    {"fclose", SymbolFamily::kStdio},  {"fread", SymbolFamily::kStdio},
    {"fwrite", SymbolFamily::kStdio},  {"fseek", SymbolFamily::kStdio},
};

std::string self_object_path() {
  Dl_info info{};
  if (dladdr(reinterpret_cast<void*>(&scan_relocations), &info) && info.dli_fname)
    return info.dli_fname;
  return {};
}

std::string exe_path() {
  char buf[4096];
  ssize_t n = readlink("/proc/self/exe", buf, sizeof(buf) - 1);
  if (n <= 0) return "[exe]";
  buf[n] = '\0';
  return buf;
}

struct ScanContext {
  std::span<const SymbolTarget> targets;
  const ScanOptions* opts;
  std::string self_path;
  std::string main_path;
  std::vector<RelocationSlot> slots;
  bool main_seen = false;
  bool main_has_dynamic = false;
};

const SymbolTarget* match_target(std::span<const SymbolTarget> targets,
                                 const char* name) {
  for (const auto& t : targets)
    if (t.name == name) return &t;
  return nullptr;
}

bool object_selected(const ScanContext& ctx, const std::string& object_name) {
  if (!ctx.self_path.empty() && object_name == ctx.self_path &&
      object_name != ctx.main_path)
    return false;  // never patch our own wrapper library
  if (ctx.opts->object_filter.empty()) return true;
  for (const auto& pat : ctx.opts->object_filter) {
    if (pat == "[exe]" && object_name == ctx.main_path) return true;
    if (!pat.empty() && object_name.find(pat) != std::string::npos) return true;
  }
  return false;
}

int scan_object(struct dl_phdr_info* info, std::size_t, void* data) {
  auto& ctx = *static_cast<ScanContext*>(data);

  const bool is_main = !info->dlpi_name || !info->dlpi_name[0];
  const ElfW(Dyn)* dyn = nullptr;
  const ElfW(Phdr)* relro = nullptr;
  for (int i = 0; i < info->dlpi_phnum; ++i) {
    if (info->dlpi_phdr[i].p_type == PT_DYNAMIC)
      dyn = reinterpret_cast<const ElfW(Dyn)*>(info->dlpi_addr +
                                               info->dlpi_phdr[i].p_vaddr);
    if (info->dlpi_phdr[i].p_type == PT_GNU_RELRO) relro = &info->dlpi_phdr[i];
  }
  if (is_main) {
    ctx.main_seen = true;
    ctx.main_has_dynamic = dyn != nullptr;
  }
  if (!dyn) return 0;

  std::string object_name =
      (info->dlpi_name && info->dlpi_name[0]) ? info->dlpi_name : ctx.main_path;
  if (!object_selected(ctx, object_name)) return 0;

  // d_ptr values may be pre- or post-relocation depending on the loader;
  // treat values below the load base as file-relative.
  auto fix = [&](ElfW(Addr) p) -> ElfW(Addr) {
    return p >= info->dlpi_addr ? p : info->dlpi_addr + p;
  };

  const ElfW(Rela)* jmprel = nullptr;
  std::size_t jmprel_size = 0;
  ElfW(Sxword) pltrel_type = DT_RELA;
  const ElfW(Rela)* rela = nullptr;
  std::size_t rela_size = 0;
  const ElfW(Sym)* symtab = nullptr;
  const char* strtab = nullptr;

  for (const ElfW(Dyn)* d = dyn; d->d_tag != DT_NULL; ++d) {
    switch (d->d_tag) {
      case DT_JMPREL:
        jmprel = reinterpret_cast<const ElfW(Rela)*>(fix(d->d_un.d_ptr));
        break;
      case DT_PLTRELSZ:
        jmprel_size = d->d_un.d_val;
        break;
      case DT_PLTREL:
        pltrel_type = static_cast<ElfW(Sxword)>(d->d_un.d_val);
        break;
      case DT_RELA:
        rela = reinterpret_cast<const ElfW(Rela)*>(fix(d->d_un.d_ptr));
        break;
      case DT_RELASZ:
        rela_size = d->d_un.d_val;
        break;
      case DT_SYMTAB:
        symtab = reinterpret_cast<const ElfW(Sym)*>(fix(d->d_un.d_ptr));
        break;
      case DT_STRTAB:
        strtab = reinterpret_cast<const char*>(fix(d->d_un.d_ptr));
        break;
      default:
        break;
    }
  }
  if (!symtab || !strtab) return 0;

  auto in_relro = [&](ElfW(Addr) vaddr) {
    if (!relro) return false;
    ElfW(Addr) lo = info->dlpi_addr + relro->p_vaddr;
    return vaddr >= lo && vaddr < lo + relro->p_memsz;
  };

  std::set<std::string> seen;  // symbols already matched via JUMP_SLOT
  auto emit = [&](const ElfW(Rela)& r, const SymbolTarget& target) {
    ElfW(Addr) vaddr = info->dlpi_addr + r.r_offset;
    ctx.slots.push_back({object_name, target,
                         reinterpret_cast<void**>(vaddr), in_relro(vaddr)});
  };

  if (jmprel && jmprel_size && pltrel_type == DT_RELA) {
    for (std::size_t i = 0; i < jmprel_size / sizeof(ElfW(Rela)); ++i) {
      const ElfW(Rela)& r = jmprel[i];
      if (ELF64_R_TYPE(r.r_info) != kJumpSlotReloc) continue;
      const char* name = strtab + symtab[ELF64_R_SYM(r.r_info)].st_name;
      if (const SymbolTarget* t = match_target(ctx.targets, name)) {
        if (seen.insert(name).second) emit(r, *t);
      }
    }
  }
  // GLOB_DAT only where no JUMP_SLOT exists (e.g. -fno-plt builds).
  if (rela && rela_size) {
    for (std::size_t i = 0; i < rela_size / sizeof(ElfW(Rela)); ++i) {
      const ElfW(Rela)& r = rela[i];
      if (ELF64_R_TYPE(r.r_info) != kGlobDatReloc) continue;
      const char* name = strtab + symtab[ELF64_R_SYM(r.r_info)].st_name;
      if (const SymbolTarget* t = match_target(ctx.targets, name)) {
        if (seen.insert(name).second) emit(r, *t);
      }
    }
  }
  return 0;
}

std::mutex g_attach_mu;
std::atomic<bool> g_runtime_attached{false};

void write_slot(void** slot, void* value, bool read_only) {
  long page_size = sysconf(_SC_PAGESIZE);
  auto addr = reinterpret_cast<std::uintptr_t>(slot);
  void* page = reinterpret_cast<void*>(addr & ~static_cast<std::uintptr_t>(page_size - 1));
  if (read_only && mprotect(page, static_cast<std::size_t>(page_size),
                            PROT_READ | PROT_WRITE) != 0)
    throw SlotWriteDenied("cannot make relocation page writable: " +
                          std::string(std::strerror(errno)));
  __atomic_store_n(slot, value, __ATOMIC_SEQ_CST);
  if (read_only)
    mprotect(page, static_cast<std::size_t>(page_size), PROT_READ);
}

}  // namespace

std::span<const SymbolTarget> symbol_catalog() { return kCatalog; }

std::vector<SymbolTarget> catalog_from_env() {
  const char* v = std::getenv("IOTRACE_SYMBOLS");
  auto all = symbol_catalog();
  if (!v || !*v) return {all.begin(), all.end()};
  std::vector<SymbolTarget> out;
  std::string_view list(v);
  while (!list.empty()) {
    auto comma = list.find(',');
    std::string_view name = list.substr(0, comma);
    list = comma == std::string_view::npos ? std::string_view{}
                                           : list.substr(comma + 1);
    for (const auto& t : all)
      if (t.name == name) out.push_back(t);
  }
  return out;
}

std::vector<RelocationSlot> scan_relocations(std::span<const SymbolTarget> targets,
                                             const ScanOptions& opts) {
  ScanContext ctx;
  ctx.targets = targets;
  ctx.opts = &opts;
  ctx.self_path = self_object_path();
  ctx.main_path = exe_path();
  dl_iterate_phdr(&scan_object, &ctx);
  // The vdso carries a dynamic section even in static binaries; attach
  // support hinges on the main executable being dynamically linked.
  if (!ctx.main_seen || !ctx.main_has_dynamic)
    throw RelocationUnreadable(
        "main executable exposes no dynamic relocation metadata; runtime "
        "attachment needs a dynamically linked process");
  std::sort(ctx.slots.begin(), ctx.slots.end(),
            [](const RelocationSlot& a, const RelocationSlot& b) {
              return a.slot_address < b.slot_address;
            });
  return ctx.slots;
}

AttachmentState attach(std::span<const SymbolTarget> targets,
                       const WrapperMap& wrappers, const ScanOptions& opts) {
  std::lock_guard lock(g_attach_mu);
  if (g_runtime_attached.load())
    throw AlreadyAttached("a runtime attachment is already active");

  auto slots = scan_relocations(targets, opts);

  AttachmentState state;
  try {
    for (const auto& slot : slots) {
      auto it = wrappers.find(slot.symbol.name);
      if (it == wrappers.end() || !it->second) continue;
      void* original = __atomic_load_n(slot.slot_address, __ATOMIC_SEQ_CST);
      write_slot(slot.slot_address, it->second, slot.read_only);
      state.patches.push_back({slot.object_name, slot.symbol, slot.slot_address,
                               original, it->second, slot.read_only});
    }
  } catch (...) {
    for (auto it = state.patches.rbegin(); it != state.patches.rend(); ++it)
      write_slot(it->slot_address, it->original_value, it->slot_read_only);
    throw;
  }

  if (!state.patches.empty()) {
    state.mode = AttachMode::kRuntime;
    g_runtime_attached.store(true);
  }
  return state;
}

AttachmentState detach(AttachmentState state) {
  std::lock_guard lock(g_attach_mu);
  if (state.mode != AttachMode::kRuntime)
    throw NotAttached("detach requires an active runtime attachment");
  for (const auto& p : state.patches)
    write_slot(p.slot_address, p.original_value, p.slot_read_only);
  state.patches.clear();
  state.mode = AttachMode::kDetached;
  g_runtime_attached.store(false);
  return state;
}

bool runtime_attached() { return g_runtime_attached.load(); }

}  // namespace iotrace
