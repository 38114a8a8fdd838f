#pragma once

// Deterministic tick-driven simulation of one scenario.
//
// Per tick: scheduled events in (tick, insertion) order, then active file
// streams, then one background reclaim step per node, then the sample (if
// any) followed by an LMK scan. Allocation failures consult LMK, then OOMK
// when free memory in scope is under the min watermarks, and retry once.

#include <functional>
#include <queue>
#include <random>
#include <set>

#include "vnodesim/allocator.hpp"
#include "vnodesim/killers.hpp"
#include "vnodesim/latency.hpp"
#include "vnodesim/lifecycle.hpp"
#include "vnodesim/scenario.hpp"

namespace vnodesim {

struct LaunchRecord {
  Tick tick = 0;
  Pid pid = 0;
  std::string name;
  Trust trust = Trust::Official;
  NodeId node = 0;
  FrameCount frames = 0;
  FrameCount reclaimed = 0;
  int kills = 0;
  double latency_ms = 0.0;
  bool ok = true;
};

struct Sample {
  Tick tick = 0;
  std::vector<NodeUsage> nodes;
};

struct ReclaimRow {
  Tick tick = 0;
  NodeId node = 0;
  FrameCount reclaimed = 0;
  FrameCount written_back = 0;
};

struct MetricsReport {
  std::string scenario;
  std::uint64_t seed = 0;
  Tick sample_every = 0;
  Tick end_tick = 0;
  std::size_t node_count = 0;
  std::vector<Sample> samples;
  std::vector<ReclaimRow> reclaim;
  std::vector<KillRecord> kills;
  std::vector<LaunchRecord> launches;
  FrameCount alloc_stalls = 0;
  FrameCount total_reclaimed = 0;
  FrameCount total_written_back = 0;
  FrameCount file_io_applied = 0;
  std::vector<NodeUsage> final_nodes;

  int kill_count(Killer k) const {
    int n = 0;
    for (const auto& r : kills) n += r.killer == k ? 1 : 0;
    return n;
  }
  FrameCount final_free() const {
    FrameCount f = 0;
    for (const auto& u : final_nodes) f += u.free;
    return f;
  }
  /// Mean latency over launches of one trust class; 0 when there are none.
  double mean_launch_ms(Trust t) const {
    double sum = 0;
    int n = 0;
    for (const auto& l : launches) {
      if (l.trust != t) continue;
      sum += l.latency_ms;
      ++n;
    }
    return n == 0 ? 0.0 : sum / n;
  }
  const LaunchRecord* launch_of(std::string_view name) const {
    for (const auto& l : launches) {
      if (l.name == name) return &l;
    }
    return nullptr;
  }
};

/// Stable event queue: ordered by tick, then by insertion sequence.
class EventQueue {
 public:
  void push(EventSpec e) { heap_.push(Entry{e.tick, next_seq_++, std::move(e)}); }
  bool empty() const { return heap_.empty(); }
  Tick next_tick() const { return heap_.top().tick; }
  EventSpec pop() {
    EventSpec e = heap_.top().event;
    heap_.pop();
    return e;
  }

 private:
  struct Entry {
    Tick tick;
    std::uint64_t seq;
    EventSpec event;
    bool operator>(const Entry& o) const { return tick != o.tick ? tick > o.tick : seq > o.seq; }
  };
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap_;
  std::uint64_t next_seq_ = 0;
};

class Engine;

struct EngineHooks {
  std::function<void(const Engine&, Tick)> on_tick_end;
  FramePool::ReleaseHook on_release;
};

inline NodeTopology build_topology(const Scenario& s) {
  auto sizes = s.node_sizes();
  NodeTopology topo = topology_from_sizes(sizes);
  std::map<NodeId, std::set<int>> masks;
  for (const auto& [cpu, node] : s.cpus) masks[node].insert(cpu);
  for (const auto& [node, cpus] : masks) topo = vnode_set_cpumask(std::move(topo), node, cpus);
  return topo;
}

class Engine {
 public:
  explicit Engine(const Scenario& scenario, EngineHooks hooks = {})
      : scenario_(scenario),
        pool_(build_topology(scenario), scenario.watermarks),
        lru_(pool_),
        procs_(pool_.node_count(), scenario.adj),
        rng_(scenario.seed),
        hooks_(std::move(hooks)),
        budget_(pool_.node_count(), 0),
        tick_reclaim_(pool_.node_count()) {
    scenario_.lmk.validate();
    if (hooks_.on_release) pool_.set_release_hook(hooks_.on_release);
    reserve_kernel(pool_, 0, scenario_.kernel_frames);
  }

  MetricsReport run() {
    MetricsReport rep;
    rep.scenario = scenario_.name;
    rep.seed = scenario_.seed;
    rep.sample_every = scenario_.sample_every;
    rep.end_tick = scenario_.end_tick();
    rep.node_count = pool_.node_count();
    report_ = &rep;

    EventQueue queue;
    std::set<Tick> sample_ticks;
    for (const auto& e : scenario_.events) {
      if (e.action == EventAction::Sample) sample_ticks.insert(e.tick);
      queue.push(e);
    }
    if (scenario_.sample_every > 0) {
      for (Tick t = 0; t <= rep.end_tick; t += scenario_.sample_every) sample_ticks.insert(t);
    }

    for (Tick t = 0; t <= rep.end_tick; ++t) {
      now_ = t;
      std::fill(budget_.begin(), budget_.end(), scenario_.writeback_per_tick);
      std::fill(tick_reclaim_.begin(), tick_reclaim_.end(), ReclaimResult{});

      while (!queue.empty() && queue.next_tick() == t) apply(queue.pop());

      for (std::size_t i = 0; i < streams_.size(); ++i) advance_stream(streams_[i]);
      std::erase_if(streams_, [this](const Stream& s) { return s.remaining == 0 || !procs_.at(s.owner).alive; });

      for (std::size_t n = 0; n < pool_.node_count(); ++n) {
        const auto node = static_cast<NodeId>(n);
        account(background_step(pool_, lru_, node, budget_[n]), node);
      }
      for (std::size_t n = 0; n < pool_.node_count(); ++n) {
        const auto& r = tick_reclaim_[n];
        if (r.reclaimed > 0 || r.written_back > 0) {
          rep.reclaim.push_back(ReclaimRow{t, static_cast<NodeId>(n), r.reclaimed, r.written_back});
        }
      }

      if (sample_ticks.count(t)) sample();
      if (hooks_.on_tick_end) hooks_.on_tick_end(*this, t);
    }

    rep.final_nodes = free_report(pool_).nodes;
    report_ = nullptr;
    return rep;
  }

  /// Streams up to `frames` dirty file pages for `owner` onto `node` this
  /// tick; returns the frames actually placed.
  FrameCount file_io_step(NodeId node, FrameCount frames, Pid owner) {
    if (frames < 1 || !procs_.at(owner).alive) return 0;
    const Attempt a = allocate(node, frames, owner, FrameKind::FileDirty);
    if (a.ok) return frames;
    ++stalls();
    if (!procs_.at(owner).alive) return 0;
    // Drop to whatever the node can give right now without reclaim.
    const FrameCount avail = pool_.free_count(node) - pool_.watermarks(node).min;
    if (avail <= 0) return 0;
    const Attempt partial = allocate_no_killers(node, std::min(avail, frames), owner, FrameKind::FileDirty);
    return partial.ok ? std::min(avail, frames) : 0;
  }

  const Scenario& scenario() const { return scenario_; }
  const FramePool& pool() const { return pool_; }
  const LruLists& lru() const { return lru_; }
  const ProcessTable& processes() const { return procs_; }
  Tick now() const { return now_; }

 private:
  struct Stream {
    Pid owner;
    NodeId node;
    FrameCount remaining;
    FrameCount rate;
    double jitter;
  };

  struct Attempt {
    bool ok = false;
    FrameCount reclaimed = 0;
    int kills = 0;
  };

  FrameCount& stalls() { return report_ ? report_->alloc_stalls : scratch_stalls_; }

  void account(const ReclaimResult& r, NodeId node) {
    const auto n = static_cast<std::size_t>(node);
    budget_[n] -= r.written_back;
    tick_reclaim_[n] += ReclaimResult{r.reclaimed, r.written_back, {}};
    for (const auto& [pid, count] : r.freed_by_owner) {
      if (pid > 0) procs_.add_resident(pid, node, 0, -count);
    }
    if (report_) {
      report_->total_reclaimed += r.reclaimed;
      report_->total_written_back += r.written_back;
    }
  }

  ScanScope scope_for(NodeId node) const {
    return scenario_.lmk.scope == KillScope::Global ? ScanScope{} : ScanScope{node};
  }

  AllocOutcome try_alloc(NodeId node, FrameCount count, Pid owner, FrameKind kind, Attempt& a) {
    auto out = alloc_frames(pool_, lru_, node, count, owner, kind, budget_[static_cast<std::size_t>(node)]);
    account(out.reclaim, node);
    a.reclaimed += out.reclaim.reclaimed;
    if (out.allocated) {
      if (kind == FrameKind::Anon) procs_.add_resident(owner, node, count, 0);
      else procs_.add_resident(owner, node, 0, count);
    }
    return out;
  }

  Attempt allocate_no_killers(NodeId node, FrameCount count, Pid owner, FrameKind kind) {
    Attempt a;
    a.ok = try_alloc(node, count, owner, kind, a).allocated;
    return a;
  }

  Attempt allocate(NodeId node, FrameCount count, Pid owner, FrameKind kind) {
    Attempt a;
    if (try_alloc(node, count, owner, kind, a).allocated) {
      a.ok = true;
      return a;
    }
    const ScanScope scope = scope_for(node);
    Killer killer = Killer::Lmk;
    std::optional<Pid> victim = lmk_scan(pool_, procs_, scenario_.lmk, scope);
    if (!victim) {
      const ScopeMemory mem = scope_memory(pool_, scope);
      if (mem.free < mem.min_watermark) {
        victim = oomk_select(procs_, scope);
        killer = Killer::Oomk;
      }
    }
    if (!victim) return a;
    kill(*victim, killer, scope);
    ++a.kills;
    if (!procs_.at(owner).alive) return a;
    a.ok = try_alloc(node, count, owner, kind, a).allocated;
    return a;
  }

  void kill(Pid pid, Killer killer, ScanScope scope) {
    KillRecord rec = execute_kill(pool_, lru_, procs_, pid, killer, scope, now_);
    if (report_) report_->kills.push_back(std::move(rec));
  }

  void apply(const EventSpec& e) {
    switch (e.action) {
      case EventAction::Spawn: spawn(e); break;
      case EventAction::SetState:
        if (const Process* p = procs_.find(e.app); p && p->alive) procs_.set_state(p->pid, e.state);
        break;
      case EventAction::AllocAnon:
        if (const Process* p = procs_.find(e.app); p && p->alive) {
          if (!allocate(p->home_node, e.frames, p->pid, FrameKind::Anon).ok) ++stalls();
        }
        break;
      case EventAction::FileIo:
        if (const Process* p = procs_.find(e.app); p && p->alive) {
          streams_.push_back(Stream{p->pid, p->home_node, e.frames, e.rate, e.jitter});
        }
        break;
      case EventAction::Sample:
      case EventAction::End:
        break;
    }
  }

  void spawn(const EventSpec& e) {
    const AppSpec* spec = scenario_.app(e.app);
    if (spec == nullptr) throw SimError(ErrorKind::UnknownProcess, e.app);
    const AllocRequest req =
        procs_.spawn(spec->name, spec->trust, spec->state, spec->anon_frames, pool_.topology());
    LaunchRecord rec{now_, req.pid, spec->name, spec->trust, req.node, req.frames};
    if (req.frames > 0) {
      const Attempt a = allocate(req.node, req.frames, req.pid, FrameKind::Anon);
      rec.ok = a.ok;
      rec.reclaimed = a.reclaimed;
      rec.kills = a.kills;
      if (!a.ok) {
        if (procs_.at(req.pid).alive) procs_.mark_dead(req.pid);
        rec.frames = 0;
      }
    }
    rec.latency_ms = launch_latency(scenario_.latency, rec.frames, rec.reclaimed, rec.kills);
    if (report_) report_->launches.push_back(std::move(rec));
  }

  void advance_stream(Stream& s) {
    if (s.remaining <= 0 || !procs_.at(s.owner).alive) return;
    FrameCount rate = s.rate;
    if (s.jitter > 0) {
      std::uniform_real_distribution<double> d(-s.jitter, s.jitter);
      rate = std::max<FrameCount>(1, std::llround(static_cast<double>(s.rate) * (1.0 + d(rng_))));
    }
    const FrameCount applied = file_io_step(s.node, std::min(rate, s.remaining), s.owner);
    s.remaining -= applied;
    if (report_) report_->file_io_applied += applied;
  }

  void sample() {
    report_->samples.push_back(Sample{now_, free_report(pool_).nodes});
    if (scenario_.lmk.scope == KillScope::Global) {
      if (auto v = lmk_scan(pool_, procs_, scenario_.lmk, ScanScope{})) kill(*v, Killer::Lmk, ScanScope{});
    } else {
      for (std::size_t n = 0; n < pool_.node_count(); ++n) {
        const ScanScope scope{static_cast<NodeId>(n)};
        if (auto v = lmk_scan(pool_, procs_, scenario_.lmk, scope)) kill(*v, Killer::Lmk, scope);
      }
    }
  }

  Scenario scenario_;
  FramePool pool_;
  LruLists lru_;
  ProcessTable procs_;
  std::mt19937_64 rng_;
  EngineHooks hooks_;
  std::vector<FrameCount> budget_;
  std::vector<ReclaimResult> tick_reclaim_;
  std::vector<Stream> streams_;
  MetricsReport* report_ = nullptr;
  FrameCount scratch_stalls_ = 0;
  Tick now_ = 0;
};

inline MetricsReport run(const Scenario& scenario, EngineHooks hooks = {}) {
  return Engine(scenario, std::move(hooks)).run();
}

}  // namespace vnodesim
