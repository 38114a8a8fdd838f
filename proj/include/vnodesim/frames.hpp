#pragma once

// Physical frame pool: per-frame ownership records, node-scoped free lists,
// per-node category counters and reclaim watermarks.

#include <algorithm>
#include <functional>
#include <string>
#include <vector>

#include "vnodesim/topology.hpp"
#include "vnodesim/types.hpp"

namespace vnodesim {

enum class FrameKind : std::uint8_t { Free, Anon, FileClean, FileDirty, Kernel };

inline const char* to_string(FrameKind kind) {
  switch (kind) {
    case FrameKind::Free: return "FREE";
    case FrameKind::Anon: return "ANON";
    case FrameKind::FileClean: return "FILE_CLEAN";
    case FrameKind::FileDirty: return "FILE_DIRTY";
    case FrameKind::Kernel: return "KERNEL";
  }
  return "?";
}

inline bool is_file(FrameKind kind) {
  return kind == FrameKind::FileClean || kind == FrameKind::FileDirty;
}

struct FrameState {
  Pid owner = kOwnerFree;
  FrameKind kind = FrameKind::Free;
  NodeId node = 0;

  bool operator==(const FrameState&) const = default;
};

struct Watermarks {
  FrameCount min = 0;
  FrameCount low = 0;
  FrameCount high = 0;

  bool operator==(const Watermarks&) const = default;
};

/// min = max(floor, node_frames / divisor); low = min + min/4; high = min + min/2.
struct WatermarkPolicy {
  FrameCount min_floor = 256;
  FrameCount min_divisor = 256;

  Watermarks compute(FrameCount node_frames) const {
    if (min_floor < 1 || min_divisor < 1) {
      throw SimError(ErrorKind::InvalidConfig, "watermark floor and divisor must be >= 1");
    }
    Watermarks w;
    w.min = std::max(min_floor, node_frames / min_divisor);
    w.low = w.min + w.min / 4;
    w.high = w.min + w.min / 2;
    if (!(0 < w.min && w.min <= w.low && w.low <= w.high && w.high < node_frames)) {
      throw SimError(ErrorKind::InvalidConfig, "watermarks {" + std::to_string(w.min) + ", " +
                                                   std::to_string(w.low) + ", " + std::to_string(w.high) +
                                                   "} do not fit a node of " +
                                                   std::to_string(node_frames) + " frames");
    }
    return w;
  }

  bool operator==(const WatermarkPolicy&) const = default;
};

struct NodeCounters {
  FrameCount free = 0;
  FrameCount anon = 0;
  FrameCount file_clean = 0;
  FrameCount file_dirty = 0;
  FrameCount kernel = 0;

  FrameCount file() const { return file_clean + file_dirty; }
  FrameCount total() const { return free + anon + file() + kernel; }

  bool operator==(const NodeCounters&) const = default;
};

enum class ReleaseCause { Free, Reclaim };

class FramePool {
 public:
  using ReleaseHook = std::function<void(FrameId, const FrameState&, ReleaseCause)>;

  explicit FramePool(NodeTopology topology, WatermarkPolicy policy = {})
      : topology_(std::move(topology)) {
    const auto nodes = topology_.node_count();
    frames_.resize(static_cast<std::size_t>(topology_.total_frames()));
    counters_.resize(nodes);
    watermarks_.reserve(nodes);
    free_lists_.resize(nodes);
    for (const auto& r : topology_.ranges()) {
      watermarks_.push_back(policy.compute(r.size()));
      auto& list = free_lists_[static_cast<std::size_t>(r.node_id)];
      list.reserve(static_cast<std::size_t>(r.size()));
      // Lowest frame ids are handed out first.
      for (FrameId f = r.end_frame; f > r.start_frame; --f) {
        frames_[f - 1] = FrameState{kOwnerFree, FrameKind::Free, r.node_id};
        list.push_back(f - 1);
      }
      counters_[static_cast<std::size_t>(r.node_id)].free = r.size();
    }
  }

  const NodeTopology& topology() const { return topology_; }
  std::size_t node_count() const { return topology_.node_count(); }
  FrameCount total_frames() const { return topology_.total_frames(); }

  const FrameState& frame(FrameId f) const {
    require_frame(f);
    return frames_[f];
  }
  const std::vector<FrameState>& frames() const { return frames_; }

  const NodeCounters& counters(NodeId node) const {
    require_node(node);
    return counters_[static_cast<std::size_t>(node)];
  }
  FrameCount free_count(NodeId node) const { return counters(node).free; }
  const Watermarks& watermarks(NodeId node) const {
    require_node(node);
    return watermarks_[static_cast<std::size_t>(node)];
  }

  /// Moves `count` frames of `node` from the free list to `owner`. No
  /// watermark or reclaim logic; the caller checks availability.
  std::vector<FrameId> take(NodeId node, FrameCount count, Pid owner, FrameKind kind) {
    require_node(node);
    if (kind == FrameKind::Free) throw SimError(ErrorKind::InvalidConfig, "cannot take as FREE");
    auto& list = free_lists_[static_cast<std::size_t>(node)];
    if (count < 0 || static_cast<std::size_t>(count) > list.size()) {
      throw SimError(ErrorKind::InvalidConfig, "take of " + std::to_string(count) + " exceeds free list");
    }
    std::vector<FrameId> out;
    out.reserve(static_cast<std::size_t>(count));
    auto& c = counters_[static_cast<std::size_t>(node)];
    for (FrameCount i = 0; i < count; ++i) {
      FrameId f = list.back();
      list.pop_back();
      frames_[f].owner = owner;
      frames_[f].kind = kind;
      out.push_back(f);
    }
    c.free -= count;
    bump(c, kind, count);
    return out;
  }

  /// Returns a frame to its node's free list; reports the prior state.
  FrameState release(FrameId f, ReleaseCause cause) {
    require_frame(f);
    FrameState before = frames_[f];
    if (before.kind == FrameKind::Free) {
      throw SimError(ErrorKind::DoubleFree, "frame " + std::to_string(f));
    }
    if (release_hook_) release_hook_(f, before, cause);
    auto& c = counters_[static_cast<std::size_t>(before.node)];
    bump(c, before.kind, -1);
    c.free += 1;
    frames_[f].owner = kOwnerFree;
    frames_[f].kind = FrameKind::Free;
    free_lists_[static_cast<std::size_t>(before.node)].push_back(f);
    return before;
  }

  /// Writeback completion: FILE_DIRTY -> FILE_CLEAN.
  void mark_clean(FrameId f) {
    require_frame(f);
    auto& st = frames_[f];
    if (st.kind != FrameKind::FileDirty) {
      throw SimError(ErrorKind::NotFilePage, "frame " + std::to_string(f) + " is not dirty");
    }
    st.kind = FrameKind::FileClean;
    auto& c = counters_[static_cast<std::size_t>(st.node)];
    c.file_dirty -= 1;
    c.file_clean += 1;
  }

  /// Full recount of one node from the frame records.
  NodeCounters recount(NodeId node) const {
    const auto& r = topology_.range(node);
    NodeCounters c;
    for (FrameId f = r.start_frame; f < r.end_frame; ++f) bump(c, frames_[f].kind, 1);
    return c;
  }

  std::vector<FrameId> frames_owned_by(Pid owner) const {
    std::vector<FrameId> out;
    for (FrameId f = 0; f < frames_.size(); ++f) {
      if (frames_[f].owner == owner && frames_[f].kind != FrameKind::Free) out.push_back(f);
    }
    return out;
  }

  void set_release_hook(ReleaseHook hook) { release_hook_ = std::move(hook); }

 private:
  static void bump(NodeCounters& c, FrameKind kind, FrameCount delta) {
    switch (kind) {
      case FrameKind::Free: c.free += delta; break;
      case FrameKind::Anon: c.anon += delta; break;
      case FrameKind::FileClean: c.file_clean += delta; break;
      case FrameKind::FileDirty: c.file_dirty += delta; break;
      case FrameKind::Kernel: c.kernel += delta; break;
    }
  }

  void require_frame(FrameId f) const {
    if (f >= frames_.size()) throw SimError(ErrorKind::InvalidConfig, "frame " + std::to_string(f) + " out of range");
  }
  void require_node(NodeId node) const {
    if (!topology_.has_node(node)) throw SimError(ErrorKind::UnknownNode, "node " + std::to_string(node));
  }

  NodeTopology topology_;
  std::vector<FrameState> frames_;
  std::vector<NodeCounters> counters_;
  std::vector<Watermarks> watermarks_;
  std::vector<std::vector<FrameId>> free_lists_;
  ReleaseHook release_hook_;
};

/// Boot-time pool construction: every frame free, watermarks per node.
inline FramePool pool_init(const NodeTopology& topology, WatermarkPolicy policy = {}) {
  return FramePool(topology, policy);
}

struct NodeUsage {
  NodeId node = 0;  // -1 for the global row
  FrameCount free = 0;
  FrameCount file = 0;
  FrameCount anon = 0;
  FrameCount kernel = 0;

  double free_mib() const { return frames_to_mib(free); }
  double file_mib() const { return frames_to_mib(file); }
  double anon_mib() const { return frames_to_mib(anon); }

  bool operator==(const NodeUsage&) const = default;
};

struct FreeReport {
  std::vector<NodeUsage> nodes;
  NodeUsage global{-1};
};

inline FreeReport free_report(const FramePool& pool) {
  FreeReport rep;
  for (std::size_t n = 0; n < pool.node_count(); ++n) {
    const auto& c = pool.counters(static_cast<NodeId>(n));
    NodeUsage u{static_cast<NodeId>(n), c.free, c.file(), c.anon, c.kernel};
    rep.global.free += u.free;
    rep.global.file += u.file;
    rep.global.anon += u.anon;
    rep.global.kernel += u.kernel;
    rep.nodes.push_back(u);
  }
  return rep;
}

}  // namespace vnodesim
