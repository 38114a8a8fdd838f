#pragma once

// Node-scoped allocation entry point. A request is served only from the
// requested node; there is no fallback to other nodes.

#include <set>
#include <span>

#include "vnodesim/reclaim.hpp"

namespace vnodesim {

struct AllocOutcome {
  bool allocated = false;
  std::vector<FrameId> frames;
  FrameCount shortfall = 0;  // frames missing above the min watermark on failure
  ReclaimResult reclaim;     // direct reclaim performed for this request
};

/// All-or-nothing allocation of `count` frames on `node`. When the node would
/// dip below its min watermark, direct reclaim on that node runs first.
inline AllocOutcome alloc_frames(FramePool& pool, LruLists& lru, NodeId node, FrameCount count, Pid owner,
                                 FrameKind kind, FrameCount writeback_budget) {
  if (!pool.topology().has_node(node)) throw SimError(ErrorKind::UnknownNode, "node " + std::to_string(node));
  if (count < 1) throw SimError(ErrorKind::ZeroCount, "allocation of " + std::to_string(count) + " frames");
  if (kind != FrameKind::Anon && !is_file(kind)) {
    throw SimError(ErrorKind::InvalidConfig, std::string("cannot allocate as ") + to_string(kind));
  }

  AllocOutcome out;
  const FrameCount min = pool.watermarks(node).min;
  FrameCount need = count + min - pool.free_count(node);
  if (need > 0) out.reclaim = shrink_node(pool, lru, node, need, writeback_budget);

  need = count + min - pool.free_count(node);
  if (need > 0) {
    out.shortfall = need;
    return out;
  }
  out.frames = pool.take(node, count, owner, kind);
  if (is_file(kind)) {
    for (FrameId f : out.frames) lru.insert(pool, f);
  }
  out.allocated = true;
  return out;
}

/// Releases frames back to their nodes. Validates the whole list first, so a
/// DoubleFree leaves the pool untouched.
inline void free_frames(FramePool& pool, LruLists& lru, std::span<const FrameId> frame_ids) {
  std::set<FrameId> seen;
  for (FrameId f : frame_ids) {
    if (pool.frame(f).kind == FrameKind::Free || !seen.insert(f).second) {
      throw SimError(ErrorKind::DoubleFree, "frame " + std::to_string(f));
    }
  }
  for (FrameId f : frame_ids) {
    lru.remove(pool, f);
    pool.release(f, ReleaseCause::Free);
  }
}

/// Boot-time kernel reservation; these frames are never reclaimed or freed.
inline std::vector<FrameId> reserve_kernel(FramePool& pool, NodeId node, FrameCount count) {
  if (count <= 0) return {};
  if (count > pool.free_count(node)) {
    throw SimError(ErrorKind::InvalidConfig, "kernel reservation exceeds node " + std::to_string(node));
  }
  return pool.take(node, count, kOwnerKernel, FrameKind::Kernel);
}

}  // namespace vnodesim
