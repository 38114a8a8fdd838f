#pragma once

// Virtual memory node layout: frame ranges per node, the inter-node distance
// table, and the CPU-to-node binding.

#include <algorithm>
#include <cstddef>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "vnodesim/types.hpp"

namespace vnodesim {

inline constexpr int kLocalDistance = 10;
inline constexpr int kRemoteDistance = 20;

struct VnodeRange {
  NodeId node_id = 0;
  FrameId start_frame = 0;  // inclusive
  FrameId end_frame = 0;    // exclusive

  FrameCount size() const { return static_cast<FrameCount>(end_frame) - start_frame; }
  bool contains(FrameId f) const { return f >= start_frame && f < end_frame; }

  bool operator==(const VnodeRange&) const = default;
};

class NodeTopology {
 public:
  NodeTopology() = default;

  std::size_t node_count() const { return ranges_.size(); }
  FrameCount total_frames() const { return total_frames_; }

  /// Ranges indexed by node id.
  const std::vector<VnodeRange>& ranges() const { return ranges_; }
  const VnodeRange& range(NodeId node) const {
    require_node(node);
    return ranges_[static_cast<std::size_t>(node)];
  }
  FrameCount node_frames(NodeId node) const { return range(node).size(); }

  int distance(NodeId from, NodeId to) const {
    require_node(from);
    require_node(to);
    return distance_[static_cast<std::size_t>(from)][static_cast<std::size_t>(to)];
  }
  const std::vector<std::vector<int>>& distance_table() const { return distance_; }

  const std::map<int, NodeId>& cpu_to_node() const { return cpu_to_node_; }

  bool has_node(NodeId node) const {
    return node >= 0 && static_cast<std::size_t>(node) < ranges_.size();
  }

  /// Owning node of a frame; binary search over the ranges sorted by start.
  NodeId node_of(FrameId frame) const {
    auto it = std::upper_bound(by_start_.begin(), by_start_.end(), frame,
                               [this](FrameId f, NodeId n) {
                                 return f < ranges_[static_cast<std::size_t>(n)].start_frame;
                               });
    if (it == by_start_.begin()) {
      throw SimError(ErrorKind::UnknownNode, "frame " + std::to_string(frame) + " below first range");
    }
    NodeId node = *std::prev(it);
    if (!ranges_[static_cast<std::size_t>(node)].contains(frame)) {
      throw SimError(ErrorKind::UnknownNode, "frame " + std::to_string(frame) + " outside topology");
    }
    return node;
  }

  bool operator==(const NodeTopology&) const = default;

 private:
  friend NodeTopology vnode_generation(std::span<const VnodeRange>, FrameCount);
  friend NodeTopology vnode_set_cpumask(NodeTopology, NodeId, const std::set<int>&);

  void require_node(NodeId node) const {
    if (!has_node(node)) {
      throw SimError(ErrorKind::UnknownNode, "node " + std::to_string(node));
    }
  }

  std::vector<VnodeRange> ranges_;
  std::vector<NodeId> by_start_;
  std::vector<std::vector<int>> distance_;
  std::map<int, NodeId> cpu_to_node_;
  FrameCount total_frames_ = 0;
};

/// Declares one virtual node over [start_frame, end_frame).
inline VnodeRange vnode_setup_memblock(FrameId start_frame, FrameId end_frame, NodeId node_id) {
  if (start_frame >= end_frame) {
    throw SimError(ErrorKind::EmptyRange, "[" + std::to_string(start_frame) + ", " +
                                              std::to_string(end_frame) + ")");
  }
  if (node_id < 0) {
    throw SimError(ErrorKind::UnknownNode, "negative node id " + std::to_string(node_id));
  }
  return VnodeRange{node_id, start_frame, end_frame};
}

/// Validates a set of ranges against the physical frame span and builds the
/// node map with a local/remote distance table.
inline NodeTopology vnode_generation(std::span<const VnodeRange> ranges, FrameCount total_frames) {
  if (ranges.empty()) {
    throw SimError(ErrorKind::CoverageError, "no ranges");
  }
  const std::size_t n = ranges.size();

  std::vector<const VnodeRange*> by_id(n, nullptr);
  for (const auto& r : ranges) {
    if (r.start_frame >= r.end_frame) {
      throw SimError(ErrorKind::EmptyRange, "node " + std::to_string(r.node_id));
    }
    if (r.node_id < 0 || static_cast<std::size_t>(r.node_id) >= n) {
      throw SimError(ErrorKind::UnknownNode,
                     "node ids must be dense 0.." + std::to_string(n - 1) + ", got " +
                         std::to_string(r.node_id));
    }
    auto& slot = by_id[static_cast<std::size_t>(r.node_id)];
    if (slot != nullptr) {
      throw SimError(ErrorKind::DuplicateNodeId, "node " + std::to_string(r.node_id));
    }
    slot = &r;
  }

  std::vector<NodeId> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<NodeId>(i);
  std::sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
    return by_id[static_cast<std::size_t>(a)]->start_frame <
           by_id[static_cast<std::size_t>(b)]->start_frame;
  });

  FrameCount cursor = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = *by_id[static_cast<std::size_t>(order[i])];
    if (i > 0) {
      const auto& prev = *by_id[static_cast<std::size_t>(order[i - 1])];
      if (r.start_frame < prev.end_frame) {
        throw SimError(ErrorKind::OverlapError, "nodes " + std::to_string(prev.node_id) + " and " +
                                                    std::to_string(r.node_id));
      }
    }
    if (static_cast<FrameCount>(r.start_frame) != cursor) {
      throw SimError(ErrorKind::CoverageError, "gap before frame " + std::to_string(r.start_frame));
    }
    cursor = r.end_frame;
  }
  if (cursor != total_frames) {
    throw SimError(ErrorKind::CoverageError, "ranges end at " + std::to_string(cursor) +
                                                 ", expected " + std::to_string(total_frames));
  }

  NodeTopology topo;
  topo.total_frames_ = total_frames;
  topo.ranges_.reserve(n);
  for (const auto* r : by_id) topo.ranges_.push_back(*r);
  topo.by_start_ = std::move(order);
  topo.distance_.assign(n, std::vector<int>(n, kRemoteDistance));
  for (std::size_t i = 0; i < n; ++i) topo.distance_[i][i] = kLocalDistance;
  return topo;
}

/// Binds each CPU in `cpus` to `node`, overwriting any previous binding.
inline NodeTopology vnode_set_cpumask(NodeTopology topology, NodeId node, const std::set<int>& cpus) {
  topology.require_node(node);
  for (int cpu : cpus) {
    if (cpu < 0) throw SimError(ErrorKind::InvalidConfig, "negative cpu index");
    topology.cpu_to_node_[cpu] = node;
  }
  return topology;
}

/// Contiguous layout from per-node sizes, node i following node i-1.
inline NodeTopology topology_from_sizes(std::span<const FrameCount> node_frames) {
  std::vector<VnodeRange> ranges;
  FrameCount cursor = 0;
  for (std::size_t i = 0; i < node_frames.size(); ++i) {
    ranges.push_back(vnode_setup_memblock(static_cast<FrameId>(cursor),
                                          static_cast<FrameId>(cursor + node_frames[i]),
                                          static_cast<NodeId>(i)));
    cursor += node_frames[i];
  }
  return vnode_generation(ranges, cursor);
}

}  // namespace vnodesim
