#pragma once

// Process model: lifecycle state -> adj priority, trust class, per-node
// resident ledgers, and trust-based node routing.

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vnodesim/topology.hpp"
#include "vnodesim/types.hpp"

namespace vnodesim {

enum class Trust : std::uint8_t { Official, Untrusted };

enum class LifecycleState : std::uint8_t { Foreground, Visible, Perceptible, Service, Home, Cached, Empty };

inline constexpr std::array<LifecycleState, 7> kAllStates = {
    LifecycleState::Foreground, LifecycleState::Visible, LifecycleState::Perceptible, LifecycleState::Service,
    LifecycleState::Home,       LifecycleState::Cached,  LifecycleState::Empty};

inline const char* to_string(Trust t) { return t == Trust::Official ? "official" : "untrusted"; }

inline const char* to_string(LifecycleState s) {
  switch (s) {
    case LifecycleState::Foreground: return "foreground";
    case LifecycleState::Visible: return "visible";
    case LifecycleState::Perceptible: return "perceptible";
    case LifecycleState::Service: return "service";
    case LifecycleState::Home: return "home";
    case LifecycleState::Cached: return "cached";
    case LifecycleState::Empty: return "empty";
  }
  return "?";
}

inline std::optional<Trust> parse_trust(std::string_view s) {
  if (s == "official") return Trust::Official;
  if (s == "untrusted") return Trust::Untrusted;
  return std::nullopt;
}

inline std::optional<LifecycleState> parse_state(std::string_view s) {
  for (auto st : kAllStates) {
    if (s == to_string(st)) return st;
  }
  return std::nullopt;
}

/// adj score per lifecycle state; must be strictly increasing in state order.
struct AdjTable {
  std::array<int, 7> values = {0, 1, 2, 5, 6, 9, 15};

  int operator()(LifecycleState s) const { return values[static_cast<std::size_t>(s)]; }

  void validate() const {
    for (std::size_t i = 1; i < values.size(); ++i) {
      if (values[i] <= values[i - 1]) {
        throw SimError(ErrorKind::InvalidConfig, "adj table must be strictly increasing");
      }
    }
  }

  bool operator==(const AdjTable&) const = default;
};

struct Resident {
  FrameCount anon = 0;
  FrameCount file = 0;

  FrameCount total() const { return anon + file; }
  bool operator==(const Resident&) const = default;
};

struct Process {
  Pid pid = 0;
  std::string name;
  Trust trust = Trust::Official;
  LifecycleState state = LifecycleState::Foreground;
  int adj = 0;
  NodeId home_node = 0;
  std::vector<Resident> resident;  // indexed by node
  bool alive = true;

  FrameCount resident_total() const {
    FrameCount t = 0;
    for (const auto& r : resident) t += r.total();
    return t;
  }
  /// Resident frames on `node`, or across all nodes when `node` is empty.
  FrameCount resident_in(std::optional<NodeId> node) const {
    if (!node) return resident_total();
    return resident.at(static_cast<std::size_t>(*node)).total();
  }
};

/// OFFICIAL apps live on node 0, UNTRUSTED on the highest-numbered node.
inline NodeId route(Trust trust, const NodeTopology& topology) {
  if (trust == Trust::Official || topology.node_count() <= 1) return 0;
  return static_cast<NodeId>(topology.node_count() - 1);
}

struct AllocRequest {
  Pid pid = 0;
  NodeId node = 0;
  FrameCount frames = 0;
};

class ProcessTable {
 public:
  explicit ProcessTable(std::size_t node_count, AdjTable adj = {}) : node_count_(node_count), adj_(adj) {
    adj_.validate();
  }

  /// Creates the process and returns the anon allocation its launch needs.
  AllocRequest spawn(const std::string& name, Trust trust, LifecycleState state, FrameCount initial_anon,
                     const NodeTopology& topology) {
    if (find(name)) throw SimError(ErrorKind::InvalidConfig, "duplicate process name " + name);
    Process p;
    p.pid = static_cast<Pid>(procs_.size()) + 1;
    p.name = name;
    p.trust = trust;
    p.state = state;
    p.adj = adj_(state);
    p.home_node = route(trust, topology);
    p.resident.assign(node_count_, Resident{});
    procs_.push_back(std::move(p));
    return AllocRequest{procs_.back().pid, procs_.back().home_node, initial_anon};
  }

  void set_state(Pid pid, LifecycleState state) {
    Process& p = at(pid);
    if (!p.alive) throw SimError(ErrorKind::DeadProcess, "pid " + std::to_string(pid));
    p.state = state;
    p.adj = adj_(state);
  }

  void mark_dead(Pid pid) {
    Process& p = at(pid);
    if (!p.alive) throw SimError(ErrorKind::DeadProcess, "pid " + std::to_string(pid));
    p.alive = false;
    for (auto& r : p.resident) r = Resident{};
  }

  void add_resident(Pid pid, NodeId node, FrameCount anon, FrameCount file) {
    auto& r = at(pid).resident.at(static_cast<std::size_t>(node));
    r.anon += anon;
    r.file += file;
  }

  Process& at(Pid pid) {
    if (pid < 1 || static_cast<std::size_t>(pid) > procs_.size()) {
      throw SimError(ErrorKind::UnknownProcess, "pid " + std::to_string(pid));
    }
    return procs_[static_cast<std::size_t>(pid) - 1];
  }
  const Process& at(Pid pid) const { return const_cast<ProcessTable*>(this)->at(pid); }

  const Process* find(std::string_view name) const {
    for (const auto& p : procs_) {
      if (p.name == name) return &p;
    }
    return nullptr;
  }

  const std::vector<Process>& all() const { return procs_; }
  const AdjTable& adj_table() const { return adj_; }

 private:
  std::size_t node_count_;
  AdjTable adj_;
  std::vector<Process> procs_;
};

}  // namespace vnodesim
