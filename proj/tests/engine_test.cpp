#include <random>

#include <gtest/gtest.h>

#include "test_support.hpp"
#include "vnodesim/engine.hpp"

using namespace vnodesim;
using testing_support::fixture;
using testing_support::random_scenario;

namespace {

Scenario tiny(bool partitioned) {
  Scenario s;
  s.name = "tiny";
  s.total_frames = 8192;
  s.baseline = !partitioned;
  if (partitioned) s.node_frames = {6144, 2048};
  s.watermarks = WatermarkPolicy{32, 1 << 20};
  s.lmk = LmkConfig{{256, 512, 1024}, {15, 9, 0}};
  s.sample_every = 5;
  s.apps = {{"home", Trust::Official, LifecycleState::Home, 1000},
            {"cache", Trust::Official, LifecycleState::Cached, 1500},
            {"sync", Trust::Untrusted, LifecycleState::Foreground, 200}};
  s.events = {{0, EventAction::Spawn, "home"},
              {0, EventAction::Spawn, "cache"},
              {1, EventAction::Spawn, "sync"},
              {2, EventAction::FileIo, "sync", LifecycleState::Foreground, 20000, 300},
              {40, EventAction::End}};
  return s;
}

}  // namespace

TEST(EventQueue, StableWithinTick) {
  EventQueue q;
  q.push(EventSpec{5, EventAction::Spawn, "b"});
  q.push(EventSpec{2, EventAction::Spawn, "a"});
  q.push(EventSpec{5, EventAction::Spawn, "c"});
  q.push(EventSpec{5, EventAction::Spawn, "d"});
  q.push(EventSpec{2, EventAction::Spawn, "e"});
  std::string order;
  while (!q.empty()) order += q.pop().app;
  EXPECT_EQ(order, "aebcd");
}

TEST(Engine, EndOnlyScenarioIsQuiet) {
  Scenario s;
  s.total_frames = 4096;
  s.watermarks = WatermarkPolicy{16, 1 << 20};
  s.sample_every = 0;
  s.events = {{10, EventAction::End}};
  const auto rep = run(s);
  EXPECT_TRUE(rep.kills.empty());
  EXPECT_TRUE(rep.launches.empty());
  EXPECT_TRUE(rep.reclaim.empty());
  EXPECT_TRUE(rep.samples.empty());
  EXPECT_EQ(rep.alloc_stalls, 0);
  EXPECT_EQ(rep.final_free(), 4096);
}

TEST(Latency, ModelArithmetic) {
  const LatencyModel m;
  // 12800 frames = 50 MiB: 50 + 25.6.
  EXPECT_NEAR(launch_latency(m, 12800, 0, 0), 75.6, 1e-9);
  // Plus 20000 reclaimed pages and one kill.
  EXPECT_NEAR(launch_latency(m, 12800, 20000, 1), 475.6, 1e-9);
}

TEST(Engine, LaunchLatencyRecorded) {
  Scenario s;
  s.total_frames = 1 << 16;
  s.sample_every = 0;
  s.apps = {{"phone", Trust::Official, LifecycleState::Foreground, 12800}};
  s.events = {{3, EventAction::Spawn, "phone"}, {4, EventAction::End}};
  const auto rep = run(s);
  ASSERT_NE(rep.launch_of("phone"), nullptr);
  EXPECT_NEAR(rep.launch_of("phone")->latency_ms, 75.6, 1e-9);
  EXPECT_EQ(rep.launch_of("phone")->tick, 3);
  EXPECT_NEAR(rep.mean_launch_ms(Trust::Official), 75.6, 1e-9);
  EXPECT_EQ(rep.mean_launch_ms(Trust::Untrusted), 0.0);
}

TEST(Engine, FileIoRateZeroIsNoop) {
  Engine eng(tiny(true));
  const auto before = eng.pool().counters(1);
  EXPECT_EQ(eng.file_io_step(1, 0, 1), 0);
  EXPECT_EQ(eng.pool().counters(1), before);
}

TEST(Engine, FileIoPlacesDirtyPagesOnNode) {
  auto s = tiny(true);
  s.events = {{0, EventAction::Spawn, "sync"}, {1, EventAction::End}};
  Engine eng(s);
  eng.run();
  const FrameCount before = eng.pool().counters(1).file_dirty;
  EXPECT_EQ(eng.file_io_step(1, 100, 1), 100);
  EXPECT_EQ(eng.pool().counters(1).file_dirty, before + 100);
  EXPECT_EQ(eng.pool().counters(0).file(), 0);
}

TEST(Engine, SampleCountMatchesCadence) {
  auto s = tiny(false);
  s.events.push_back({7, EventAction::Sample});
  const auto rep = run(s);
  // 0, 5, ..., 40 plus the explicit tick 7.
  EXPECT_EQ(rep.samples.size(), 10u);
  for (std::size_t i = 1; i < rep.samples.size(); ++i) EXPECT_LT(rep.samples[i - 1].tick, rep.samples[i].tick);
}

TEST(Engine, SetStateOnUnspawnedIsSkipped) {
  auto s = tiny(false);
  s.events.insert(s.events.begin(), EventSpec{0, EventAction::SetState, "sync", LifecycleState::Cached});
  s.events.push_back({3, EventAction::AllocAnon, "nobody_spawned", LifecycleState::Foreground, 10});
  s.apps.push_back({"nobody_spawned", Trust::Official, LifecycleState::Cached, 0});
  EXPECT_NO_THROW(run(s));
}

TEST(Engine, PartitionConfinesUntrustedIo) {
  const auto rep = run(tiny(true));
  EXPECT_EQ(rep.final_nodes[0].file, 0);
  EXPECT_GT(rep.file_io_applied, 0);
  for (const auto& k : rep.kills) EXPECT_NE(k.name, "home");
}

TEST(Engine, Deterministic) {
  auto s = tiny(true);
  s.events[3].jitter = 0.3;
  const auto a = run(s);
  const auto b = run(s);
  ASSERT_EQ(a.samples.size(), b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) EXPECT_EQ(a.samples[i].nodes, b.samples[i].nodes);
  EXPECT_EQ(a.file_io_applied, b.file_io_applied);
  EXPECT_EQ(a.kills.size(), b.kills.size());
}

// Random scenarios: frames are conserved at every tick, file pages never
// exceed what a node can hold above its min watermark plus the slack kept
// by allocations, and per-process ledgers match the frame owners.
TEST(EngineProperty, ConservationAndLedgers) {
  std::mt19937_64 rng(21);
  for (int iter = 0; iter < 60; ++iter) {
    const Scenario s = random_scenario(rng);
    EngineHooks hooks;
    hooks.on_tick_end = [&](const Engine& eng, Tick) {
      const auto& pool = eng.pool();
      FrameCount sum = 0;
      for (std::size_t n = 0; n < pool.node_count(); ++n) {
        const auto node = static_cast<NodeId>(n);
        const auto& c = pool.counters(node);
        ASSERT_EQ(c, pool.recount(node));
        ASSERT_GE(c.free, 0);
        ASSERT_LE(c.file(), pool.topology().node_frames(node) - pool.watermarks(node).min);
        sum += c.total();
      }
      ASSERT_EQ(sum, s.total_frames);
      std::map<Pid, FrameCount> owned;
      for (const auto& f : pool.frames()) {
        if (f.owner > 0) ++owned[f.owner];
      }
      for (const auto& p : eng.processes().all()) {
        ASSERT_EQ(p.resident_total(), owned[p.pid]) << p.name;
        if (!p.alive) {
          ASSERT_EQ(owned[p.pid], 0);
        }
      }
    };
    ASSERT_NO_THROW(run(s, hooks));
  }
}

TEST(Engine, FixturesRunClean) {
  for (const char* name : {"paper_baseline", "paper_partitioned"}) {
    const auto s = testing_support::scale_down(fixture(name), 16);
    const auto rep = run(s);
    EXPECT_EQ(rep.file_io_applied, s.file_io_volume()) << name;
    EXPECT_EQ(static_cast<Tick>(rep.samples.size()), s.end_tick() / s.sample_every + 1) << name;
  }
}
