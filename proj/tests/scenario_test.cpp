#include <random>

#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace vnodesim;
using testing_support::fixture;
using testing_support::fixture_path;

namespace {

const char* kMinimal = R"(
[memory]
total_mib = 64
[topology]
nodes_mib = 48, 16
[events]
5 end
)";

ErrorKind parse_error_of(const std::string& text, std::string* message = nullptr) {
  try {
    parse_scenario_text(text);
  } catch (const SimError& e) {
    if (message) *message = e.what();
    return e.kind();
  }
  ADD_FAILURE() << "expected SimError";
  return ErrorKind::IoError;
}

}  // namespace

TEST(Fixtures, BothValid) {
  const auto base = fixture("paper_baseline");
  const auto part = fixture("paper_partitioned");
  EXPECT_TRUE(validate_scenario(base).empty());
  EXPECT_TRUE(validate_scenario(part).empty());
  EXPECT_TRUE(base.baseline);
  EXPECT_EQ(base.total_frames, 524288);
  EXPECT_EQ(part.node_frames, (std::vector<FrameCount>{393216, 131072}));
  EXPECT_EQ(base.file_io_volume(), part.file_io_volume());
  EXPECT_EQ(base.file_io_volume(), 393216);
  EXPECT_EQ(base.lmk, part.lmk);
  EXPECT_EQ(base.apps, part.apps);
}

TEST(Parse, MinimalDefaults) {
  const auto s = parse_scenario_text(kMinimal);
  EXPECT_FALSE(s.baseline);
  EXPECT_EQ(s.total_frames, 16384);
  EXPECT_EQ(s.writeback_per_tick, 2048);
  EXPECT_EQ(s.lmk, LmkConfig{});
  EXPECT_EQ(s.end_tick(), 5);
}

TEST(Parse, NodeSumMismatchIsValidationError) {
  std::string msg;
  const std::string text = "[memory]\ntotal_mib = 2048\n[topology]\nnodes_mib = 1536, 1024\n[events]\n1 end\n";
  EXPECT_EQ(parse_error_of(text, &msg), ErrorKind::ValidationError);
  EXPECT_NE(msg.find("2560"), std::string::npos) << msg;
}

TEST(Parse, MissingMemorySectionNamed) {
  std::string msg;
  EXPECT_EQ(parse_error_of("[topology]\nmode = baseline\n[events]\n1 end\n", &msg), ErrorKind::ParseError);
  EXPECT_NE(msg.find("missing [memory] section"), std::string::npos) << msg;
}

TEST(Parse, SyntaxErrors) {
  const std::string head = "[memory]\ntotal_mib = 64\n[topology]\nmode = baseline\n[events]\n";
  EXPECT_EQ(parse_error_of(head + "x spawn a\n"), ErrorKind::ParseError);
  EXPECT_EQ(parse_error_of(head + "1 teleport a\n"), ErrorKind::ParseError);
  EXPECT_EQ(parse_error_of(head + "1 file_io a total_mib=4\n"), ErrorKind::ParseError);
  EXPECT_EQ(parse_error_of("[bogus]\n" + head + "1 end\n"), ErrorKind::ParseError);
  EXPECT_EQ(parse_error_of("[memory\n"), ErrorKind::ParseError);
}

TEST(Parse, SemanticErrors) {
  const std::string head = "[memory]\ntotal_mib = 64\n[topology]\nmode = baseline\n";
  EXPECT_EQ(parse_error_of(head + "[events]\n1 spawn ghost\n"), ErrorKind::ValidationError);
  EXPECT_EQ(parse_error_of(head + "[lmk]\nminfree_frames = 10, 5\nadj_ladder = 9, 0\n[events]\n1 end\n"),
            ErrorKind::ValidationError);
  EXPECT_EQ(parse_error_of("[memory]\ntotal_mib = 0.001\n[topology]\nmode = baseline\n[events]\n1 end\n"),
            ErrorKind::ValidationError);
  EXPECT_EQ(parse_error_of(head + "[events]\n5 end\n6 sample\n"), ErrorKind::ValidationError);
}

TEST(Parse, UnreadableFile) {
  try {
    parse_scenario("/nonexistent/dir/x.scn");
    FAIL();
  } catch (const SimError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::IoError);
  }
}

TEST(Parse, FractionalMibMustBeWholeFrames) {
  const std::string head = "[memory]\ntotal_mib = 64\n[topology]\nmode = baseline\n[app a]\nanon_mib = ";
  EXPECT_EQ(parse_scenario_text(head + "0.5\n[events]\n0 spawn a\n").apps[0].anon_frames, 128);
  EXPECT_EQ(parse_error_of(head + "0.001\n[events]\n0 spawn a\n"), ErrorKind::ValidationError);
}

TEST(RoundTrip, Fixtures) {
  for (const char* name : {"paper_baseline", "paper_partitioned"}) {
    const auto s = parse_scenario(fixture_path(name));
    const auto text = emit_scenario(s);
    EXPECT_EQ(parse_scenario_text(text), s) << name;
    EXPECT_EQ(emit_scenario(parse_scenario_text(text)), text) << name;
  }
}

TEST(RoundTrip, RandomScenarios) {
  std::mt19937_64 rng(17);
  for (int iter = 0; iter < 300; ++iter) {
    const auto s = testing_support::random_scenario(rng);
    ASSERT_TRUE(validate_scenario(s).empty()) << validate_scenario(s).front();
    const auto text = emit_scenario(s);
    ASSERT_EQ(parse_scenario_text(text), s) << text;
  }
}
