#pragma once

// Per-node two-queue LRU over file-backed frames and the reclaim passes that
// evict from it. Anonymous memory is never queued: without swap it can only
// leave through process exit or a kill.

#include <limits>
#include <map>
#include <vector>

#include "vnodesim/frames.hpp"

namespace vnodesim {

enum class LruQueue : std::uint8_t { None, Inactive, Active };

class LruLists {
 public:
  explicit LruLists(const FramePool& pool)
      : prev_(static_cast<std::size_t>(pool.total_frames()), kNil),
        next_(static_cast<std::size_t>(pool.total_frames()), kNil),
        where_(static_cast<std::size_t>(pool.total_frames()), LruQueue::None),
        referenced_(static_cast<std::size_t>(pool.total_frames()), 0),
        nodes_(pool.node_count()) {}

  /// New file page: inactive tail, referenced bit clear.
  void insert(const FramePool& pool, FrameId f) {
    const auto& st = pool.frame(f);
    if (!is_file(st.kind)) throw SimError(ErrorKind::NotFilePage, "frame " + std::to_string(f));
    if (where_[f] != LruQueue::None) throw SimError(ErrorKind::InvalidConfig, "frame already queued");
    referenced_[f] = 0;
    push_tail(st.node, LruQueue::Inactive, f, st.kind);
  }

  /// Drops a frame from whichever queue holds it (no-op for unqueued frames).
  void remove(const FramePool& pool, FrameId f) {
    if (where_[f] == LruQueue::None) return;
    unlink(pool.frame(f).node, f, pool.frame(f).kind);
    referenced_[f] = 0;
  }

  /// Two-touch promotion: the first touch sets the referenced bit, a second
  /// touch while inactive moves the page to the active tail.
  void touch(const FramePool& pool, FrameId f) {
    const auto& st = pool.frame(f);
    if (!is_file(st.kind) || where_[f] == LruQueue::None) {
      throw SimError(ErrorKind::NotFilePage, "frame " + std::to_string(f));
    }
    if (where_[f] == LruQueue::Inactive && referenced_[f]) {
      unlink(st.node, f, st.kind);
      push_tail(st.node, LruQueue::Active, f, st.kind);
    }
    referenced_[f] = 1;
  }

  LruQueue where(FrameId f) const { return where_[f]; }
  bool referenced(FrameId f) const { return referenced_[f] != 0; }

  FrameCount inactive_size(NodeId n) const { return node(n).inactive.size; }
  FrameCount active_size(NodeId n) const { return node(n).active.size; }
  FrameCount inactive_clean(NodeId n) const { return node(n).inactive_clean; }

  std::vector<FrameId> inactive(NodeId n) const { return materialize(node(n).inactive); }
  std::vector<FrameId> active(NodeId n) const { return materialize(node(n).active); }

 private:
  static constexpr FrameId kNil = std::numeric_limits<FrameId>::max();

  struct List {
    FrameId head = kNil;
    FrameId tail = kNil;
    FrameCount size = 0;
  };
  struct NodeLists {
    List inactive;
    List active;
    FrameCount inactive_clean = 0;
  };

  friend struct ReclaimAccess;

  const NodeLists& node(NodeId n) const { return nodes_.at(static_cast<std::size_t>(n)); }
  NodeLists& node(NodeId n) { return nodes_.at(static_cast<std::size_t>(n)); }

  List& list(NodeId n, LruQueue q) { return q == LruQueue::Active ? node(n).active : node(n).inactive; }

  void push_tail(NodeId n, LruQueue q, FrameId f, FrameKind kind) {
    List& l = list(n, q);
    prev_[f] = l.tail;
    next_[f] = kNil;
    if (l.tail != kNil) next_[l.tail] = f; else l.head = f;
    l.tail = f;
    ++l.size;
    where_[f] = q;
    if (q == LruQueue::Inactive && kind == FrameKind::FileClean) ++node(n).inactive_clean;
  }

  void unlink(NodeId n, FrameId f, FrameKind kind) {
    LruQueue q = where_[f];
    List& l = list(n, q);
    if (prev_[f] != kNil) next_[prev_[f]] = next_[f]; else l.head = next_[f];
    if (next_[f] != kNil) prev_[next_[f]] = prev_[f]; else l.tail = prev_[f];
    prev_[f] = next_[f] = kNil;
    --l.size;
    where_[f] = LruQueue::None;
    if (q == LruQueue::Inactive && kind == FrameKind::FileClean) --node(n).inactive_clean;
  }

  std::vector<FrameId> materialize(const List& l) const {
    std::vector<FrameId> out;
    out.reserve(static_cast<std::size_t>(l.size));
    for (FrameId f = l.head; f != kNil; f = next_[f]) out.push_back(f);
    return out;
  }

  std::vector<FrameId> prev_;
  std::vector<FrameId> next_;
  std::vector<LruQueue> where_;
  std::vector<std::uint8_t> referenced_;
  std::vector<NodeLists> nodes_;
};

struct ReclaimResult {
  FrameCount reclaimed = 0;
  FrameCount written_back = 0;
  std::map<Pid, FrameCount> freed_by_owner;

  ReclaimResult& operator+=(const ReclaimResult& o) {
    reclaimed += o.reclaimed;
    written_back += o.written_back;
    for (const auto& [pid, n] : o.freed_by_owner) freed_by_owner[pid] += n;
    return *this;
  }
};

struct ReclaimAccess {
  static ReclaimResult shrink(FramePool& pool, LruLists& lru, NodeId n, FrameCount target,
                              FrameCount budget) {
    ReclaimResult res;
    auto& lists = lru.node(n);
    while (res.reclaimed < target) {
      const bool inactive_progress =
          lists.inactive.size > 0 && (lists.inactive_clean > 0 || budget > 0);
      if (!inactive_progress) {
        if (lists.active.size == 0) break;
        FrameId f = lists.active.head;
        FrameKind kind = pool.frame(f).kind;
        lru.unlink(n, f, kind);
        lru.referenced_[f] = 0;
        lru.push_tail(n, LruQueue::Inactive, f, kind);
        continue;
      }
      FrameId f = lists.inactive.head;
      FrameKind kind = pool.frame(f).kind;
      lru.unlink(n, f, kind);
      if (kind == FrameKind::FileClean) {
        lru.referenced_[f] = 0;
        FrameState before = pool.release(f, ReleaseCause::Reclaim);
        ++res.reclaimed;
        ++res.freed_by_owner[before.owner];
      } else if (budget > 0) {
        pool.mark_clean(f);
        --budget;
        ++res.written_back;
        lru.push_tail(n, LruQueue::Inactive, f, FrameKind::FileClean);
      } else {
        lru.push_tail(n, LruQueue::Inactive, f, kind);
      }
    }
    return res;
  }
};

/// Evicts file pages of one node until `target` frames are freed or nothing
/// more can be freed. Clean pages at the inactive head are freed; dirty pages
/// are written back (consuming budget) and requeued at the inactive tail, or
/// rotated there untouched once the budget is spent. When the inactive queue
/// can make no progress, the active head is demoted with its referenced bit
/// cleared.
inline ReclaimResult shrink_node(FramePool& pool, LruLists& lru, NodeId node, FrameCount target,
                                 FrameCount writeback_budget) {
  if (!pool.topology().has_node(node)) throw SimError(ErrorKind::UnknownNode, "node " + std::to_string(node));
  if (target < 1) return {};
  return ReclaimAccess::shrink(pool, lru, node, target, std::max<FrameCount>(0, writeback_budget));
}

/// kswapd-style step: below the low watermark, reclaim up to the high one.
inline ReclaimResult background_step(FramePool& pool, LruLists& lru, NodeId node,
                                     FrameCount writeback_budget) {
  const auto& wm = pool.watermarks(node);
  const FrameCount free = pool.free_count(node);
  if (free >= wm.low) return {};
  return shrink_node(pool, lru, node, wm.high - free, writeback_budget);
}

}  // namespace vnodesim
