#pragma once

// Low Memory Killer (threshold ladder over free and clean page-cache memory)
// and OOM killer (badness argmax). Selection functions are pure; only
// execute_kill mutates state.

#include <optional>
#include <string>
#include <vector>

#include "vnodesim/allocator.hpp"
#include "vnodesim/lifecycle.hpp"

namespace vnodesim {

enum class KillScope : std::uint8_t { Global, PerNode };
enum class Killer : std::uint8_t { Lmk, Oomk };

inline const char* to_string(Killer k) { return k == Killer::Lmk ? "LMK" : "OOMK"; }
inline const char* to_string(KillScope s) { return s == KillScope::Global ? "global" : "per_node"; }

/// Scope of one scan: a single node, or the whole pool when empty.
using ScanScope = std::optional<NodeId>;

struct LmkConfig {
  std::vector<FrameCount> minfree = {2048, 4096, 8192, 16384, 32768, 85760};
  std::vector<int> adj_ladder = {15, 9, 6, 5, 2, 0};
  KillScope scope = KillScope::Global;

  void validate() const {
    if (minfree.empty() || minfree.size() != adj_ladder.size()) {
      throw SimError(ErrorKind::InvalidConfig, "lmk minfree and adj ladders must be non-empty and equal length");
    }
    for (std::size_t i = 1; i < minfree.size(); ++i) {
      if (minfree[i] <= minfree[i - 1]) throw SimError(ErrorKind::InvalidConfig, "lmk minfree must ascend strictly");
      if (adj_ladder[i] >= adj_ladder[i - 1]) {
        throw SimError(ErrorKind::InvalidConfig, "lmk adj ladder must descend strictly");
      }
    }
  }

  bool operator==(const LmkConfig&) const = default;
};

struct KillRecord {
  Tick tick = 0;
  Killer killer = Killer::Lmk;
  Pid pid = 0;
  std::string name;
  int adj = 0;
  FrameCount frames_released = 0;
  ScanScope scope;
};

struct ScopeMemory {
  FrameCount free = 0;
  FrameCount file_clean = 0;
  FrameCount min_watermark = 0;
};

inline ScopeMemory scope_memory(const FramePool& pool, ScanScope scope) {
  ScopeMemory m;
  for (std::size_t n = 0; n < pool.node_count(); ++n) {
    const auto node = static_cast<NodeId>(n);
    if (scope && *scope != node) continue;
    m.free += pool.counters(node).free;
    m.file_clean += pool.counters(node).file_clean;
    m.min_watermark += pool.watermarks(node).min;
  }
  return m;
}

/// Largest rung i with free < minfree[i] and clean file < minfree[i] gives the
/// adj cutoff; the victim is the highest-adj candidate at or above it, then
/// the largest resident set, then the lowest pid.
inline std::optional<Pid> lmk_select(const ScopeMemory& mem, const ProcessTable& procs, const LmkConfig& config,
                                     ScanScope scope) {
  std::optional<int> min_adj;
  for (std::size_t i = config.minfree.size(); i-- > 0;) {
    if (mem.free < config.minfree[i] && mem.file_clean < config.minfree[i]) {
      min_adj = config.adj_ladder[i];
      break;
    }
  }
  if (!min_adj) return std::nullopt;

  const Process* best = nullptr;
  FrameCount best_size = 0;
  for (const auto& p : procs.all()) {
    if (!p.alive || p.adj < *min_adj) continue;
    const FrameCount size = p.resident_in(scope);
    if (size <= 0) continue;
    if (best == nullptr || p.adj > best->adj || (p.adj == best->adj && size > best_size) ||
        (p.adj == best->adj && size == best_size && p.pid < best->pid)) {
      best = &p;
      best_size = size;
    }
  }
  if (best == nullptr) return std::nullopt;
  return best->pid;
}

inline std::optional<Pid> lmk_scan(const FramePool& pool, const ProcessTable& procs, const LmkConfig& config,
                                   ScanScope scope) {
  return lmk_select(scope_memory(pool, scope), procs, config, scope);
}

/// resident frames in scope x 2^adj, adj clamped to [0, 15].
inline std::int64_t oom_badness(const Process& p, ScanScope scope) {
  const int adj = std::clamp(p.adj, 0, 15);
  return p.resident_in(scope) << adj;
}

inline std::optional<Pid> oomk_select(const ProcessTable& procs, ScanScope scope) {
  std::optional<Pid> best;
  std::int64_t best_score = -1;
  for (const auto& p : procs.all()) {
    if (!p.alive || p.resident_in(scope) <= 0) continue;
    const auto score = oom_badness(p, scope);
    if (score > best_score) {  // pids ascend, so ties keep the lowest
      best = p.pid;
      best_score = score;
    }
  }
  return best;
}

/// Frees every frame the process holds on any node and marks it dead.
inline KillRecord execute_kill(FramePool& pool, LruLists& lru, ProcessTable& procs, Pid pid, Killer killer,
                               ScanScope scope, Tick tick) {
  const Process& p = procs.at(pid);
  if (!p.alive) throw SimError(ErrorKind::DeadProcess, "pid " + std::to_string(pid));
  const auto frames = pool.frames_owned_by(pid);
  KillRecord rec{tick, killer, pid, p.name, p.adj, static_cast<FrameCount>(frames.size()), scope};
  free_frames(pool, lru, frames);
  procs.mark_dead(pid);
  return rec;
}

}  // namespace vnodesim
