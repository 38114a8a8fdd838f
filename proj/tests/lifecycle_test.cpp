#include <random>

#include <gtest/gtest.h>

#include "vnodesim/lifecycle.hpp"

using namespace vnodesim;

namespace {

NodeTopology topo_of(std::initializer_list<FrameCount> sizes) {
  std::vector<FrameCount> v(sizes);
  return topology_from_sizes(v);
}

}  // namespace

TEST(Route, PartitionedSplit) {
  const auto topo = topo_of({393216, 131072});
  EXPECT_EQ(route(Trust::Official, topo), 0);
  EXPECT_EQ(route(Trust::Untrusted, topo), 1);
}

TEST(Route, SingleNodeSendsEverythingToZero) {
  const auto topo = topo_of({524288});
  EXPECT_EQ(route(Trust::Official, topo), 0);
  EXPECT_EQ(route(Trust::Untrusted, topo), 0);
}

TEST(Route, UntrustedGoesToHighestNode) {
  EXPECT_EQ(route(Trust::Untrusted, topo_of({100, 200, 300})), 2);
}

TEST(Spawn, ReturnsRoutedAllocation) {
  const auto topo = topo_of({393216, 131072});
  ProcessTable procs(2);
  const auto a = procs.spawn("dialer", Trust::Official, LifecycleState::Foreground, 12800, topo);
  const auto b = procs.spawn("game", Trust::Untrusted, LifecycleState::Foreground, 25600, topo);
  EXPECT_EQ(a.pid, 1);
  EXPECT_EQ(a.node, 0);
  EXPECT_EQ(a.frames, 12800);
  EXPECT_EQ(b.pid, 2);
  EXPECT_EQ(b.node, 1);
  EXPECT_EQ(procs.at(2).adj, 0);
  EXPECT_EQ(procs.at(2).resident.size(), 2u);
  EXPECT_EQ(procs.find("game")->pid, 2);
  EXPECT_EQ(procs.find("nope"), nullptr);
}

TEST(Spawn, DuplicateNameRejected) {
  const auto topo = topo_of({1024});
  ProcessTable procs(1);
  procs.spawn("a", Trust::Official, LifecycleState::Home, 0, topo);
  EXPECT_THROW(procs.spawn("a", Trust::Official, LifecycleState::Home, 0, topo), SimError);
}

TEST(SetState, AdjFollowsState) {
  const auto topo = topo_of({1024});
  ProcessTable procs(1);
  const auto pid = procs.spawn("app", Trust::Official, LifecycleState::Foreground, 0, topo).pid;
  procs.set_state(pid, LifecycleState::Cached);
  EXPECT_EQ(procs.at(pid).adj, 9);
  procs.set_state(pid, LifecycleState::Foreground);
  EXPECT_EQ(procs.at(pid).adj, 0);
  procs.set_state(pid, LifecycleState::Foreground);
  EXPECT_EQ(procs.at(pid).adj, 0);
  EXPECT_EQ(procs.at(pid).state, LifecycleState::Foreground);
}

TEST(SetState, DefaultTableValues) {
  const AdjTable adj;
  const int expect[] = {0, 1, 2, 5, 6, 9, 15};
  for (std::size_t i = 0; i < kAllStates.size(); ++i) EXPECT_EQ(adj(kAllStates[i]), expect[i]);
}

TEST(SetState, DeadProcessRejected) {
  const auto topo = topo_of({1024});
  ProcessTable procs(1);
  const auto pid = procs.spawn("app", Trust::Official, LifecycleState::Cached, 0, topo).pid;
  procs.add_resident(pid, 0, 40, 2);
  procs.mark_dead(pid);
  EXPECT_FALSE(procs.at(pid).alive);
  EXPECT_EQ(procs.at(pid).resident_total(), 0);
  try {
    procs.set_state(pid, LifecycleState::Foreground);
    FAIL();
  } catch (const SimError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DeadProcess);
  }
  EXPECT_THROW(procs.mark_dead(pid), SimError);
}

TEST(SetState, UnknownPid) {
  ProcessTable procs(1);
  try {
    procs.at(3);
    FAIL();
  } catch (const SimError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnknownProcess);
  }
}

TEST(AdjTable, MustIncreaseStrictly) {
  AdjTable t;
  EXPECT_NO_THROW(t.validate());
  t.values = {0, 1, 1, 5, 6, 9, 15};
  EXPECT_THROW(t.validate(), SimError);
  EXPECT_THROW(ProcessTable(1, t), SimError);
}

TEST(Names, ParseRoundTrip) {
  for (auto s : kAllStates) EXPECT_EQ(parse_state(to_string(s)), s);
  EXPECT_EQ(parse_trust("official"), Trust::Official);
  EXPECT_EQ(parse_trust("untrusted"), Trust::Untrusted);
  EXPECT_FALSE(parse_state("zombie").has_value());
  EXPECT_FALSE(parse_trust("maybe").has_value());
}

// Random state walks: adj always equals the table entry for the current
// state, and resident_in(scope) sums per-node ledgers.
TEST(LifecycleProperty, AdjAndResidentLedger) {
  std::mt19937_64 rng(11);
  const auto topo = topo_of({512, 512, 512});
  for (int iter = 0; iter < 200; ++iter) {
    ProcessTable procs(3);
    std::vector<std::array<FrameCount, 3>> shadow;
    for (int i = 0; i < 6; ++i) {
      procs.spawn("p" + std::to_string(i), rng() % 2 ? Trust::Official : Trust::Untrusted,
                  kAllStates[rng() % 7], 0, topo);
      shadow.push_back({0, 0, 0});
    }
    for (int step = 0; step < 50; ++step) {
      const Pid pid = static_cast<Pid>(1 + rng() % 6);
      const auto node = static_cast<NodeId>(rng() % 3);
      if (rng() % 2) {
        const auto st = kAllStates[rng() % 7];
        procs.set_state(pid, st);
        ASSERT_EQ(procs.at(pid).adj, procs.adj_table()(st));
      } else {
        const auto n = static_cast<FrameCount>(rng() % 50);
        procs.add_resident(pid, node, n, n / 2);
        shadow[static_cast<std::size_t>(pid - 1)][static_cast<std::size_t>(node)] += n + n / 2;
      }
    }
    for (const auto& p : procs.all()) {
      const auto& s = shadow[static_cast<std::size_t>(p.pid - 1)];
      for (NodeId n = 0; n < 3; ++n) ASSERT_EQ(p.resident_in(n), s[static_cast<std::size_t>(n)]);
      ASSERT_EQ(p.resident_in(std::nullopt), s[0] + s[1] + s[2]);
    }
  }
}
