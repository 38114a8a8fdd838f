#pragma once

// Trace CSVs, run summaries and baseline-vs-candidate comparison documents.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "vnodesim/engine.hpp"

namespace vnodesim {

inline std::string scope_label(const ScanScope& s) { return s ? std::to_string(*s) : "global"; }

inline std::string free_csv(const MetricsReport& r) {
  std::ostringstream o;
  o << "tick,node,free_frames,file_frames,anon_frames\n";
  for (const auto& s : r.samples) {
    for (const auto& u : s.nodes) o << s.tick << ',' << u.node << ',' << u.free << ',' << u.file << ',' << u.anon << '\n';
  }
  return o.str();
}

inline std::string reclaim_csv(const MetricsReport& r) {
  std::ostringstream o;
  o << "tick,node,reclaimed,written_back\n";
  for (const auto& row : r.reclaim) o << row.tick << ',' << row.node << ',' << row.reclaimed << ',' << row.written_back << '\n';
  return o.str();
}

inline std::string kills_csv(const MetricsReport& r) {
  std::ostringstream o;
  o << "tick,killer,pid,name,adj,frames_released,scope\n";
  for (const auto& k : r.kills) {
    o << k.tick << ',' << to_string(k.killer) << ',' << k.pid << ',' << k.name << ',' << k.adj << ','
      << k.frames_released << ',' << scope_label(k.scope) << '\n';
  }
  return o.str();
}

inline std::string launches_csv(const MetricsReport& r) {
  std::ostringstream o;
  o << "tick,pid,name,trust,node,frames,reclaimed,kills,latency_ms,ok\n";
  for (const auto& l : r.launches) {
    o << l.tick << ',' << l.pid << ',' << l.name << ',' << to_string(l.trust) << ',' << l.node << ',' << l.frames << ','
      << l.reclaimed << ',' << l.kills << ',' << detail::format_double(l.latency_ms) << ',' << (l.ok ? 1 : 0) << '\n';
  }
  return o.str();
}

inline nlohmann::json summary_json(const MetricsReport& r, const Scenario& s) {
  nlohmann::json j;
  j["scenario"] = r.scenario;
  j["seed"] = r.seed;
  j["sample_every"] = r.sample_every;
  j["end_tick"] = r.end_tick;
  j["samples"] = r.samples.size();
  j["kills_lmk"] = r.kill_count(Killer::Lmk);
  j["kills_oomk"] = r.kill_count(Killer::Oomk);
  j["alloc_stalls"] = r.alloc_stalls;
  j["total_reclaimed"] = r.total_reclaimed;
  j["total_written_back"] = r.total_written_back;
  j["file_io_frames"] = r.file_io_applied;
  auto per_node = nlohmann::json::array();
  for (const auto& u : r.final_nodes) per_node.push_back(u.free_mib());
  j["final_free_mib_per_node"] = per_node;
  j["final_free_mib"] = frames_to_mib(r.final_free());
  j["mean_launch_ms_by_trust"] = {{"official", r.mean_launch_ms(Trust::Official)},
                                  {"untrusted", r.mean_launch_ms(Trust::Untrusted)}};
  auto launches = nlohmann::json::array();
  for (const auto& l : r.launches) {
    launches.push_back({{"name", l.name}, {"tick", l.tick}, {"latency_ms", l.latency_ms}, {"ok", l.ok}});
  }
  j["launches"] = launches;
  j["config"] = {{"total_mib", frames_to_mib(s.total_frames)},
                 {"mode", s.baseline ? "baseline" : "partitioned"},
                 {"nodes_mib", [&] {
                    auto a = nlohmann::json::array();
                    for (auto f : s.node_sizes()) a.push_back(frames_to_mib(f));
                    return a;
                  }()},
                 {"lmk_scope", to_string(s.lmk.scope)},
                 {"lmk_minfree_frames", s.lmk.minfree},
                 {"lmk_adj_ladder", s.lmk.adj_ladder},
                 {"writeback_frames_per_tick", s.writeback_per_tick},
                 {"latency", {{"base_ms", s.latency.base_ms},
                              {"page_ms", s.latency.page_ms},
                              {"reclaim_ms", s.latency.reclaim_ms},
                              {"kill_ms", s.latency.kill_ms}}}};
  return j;
}

struct Comparison {
  double delta_free_mib = 0;       // candidate - reference
  int delta_kills_lmk = 0;
  int delta_kills_oomk = 0;
  double delta_official_launch_ms = 0;
};

/// Two scenarios are comparable when they share total memory and workload.
inline void check_comparable(const Scenario& a, const Scenario& b) {
  if (a.total_frames != b.total_frames) {
    throw SimError(ErrorKind::IncomparableScenarios, "total memory " + detail::format_mib(a.total_frames) + " vs " +
                                                         detail::format_mib(b.total_frames) + " MiB");
  }
  if (a.file_io_volume() != b.file_io_volume() || a.anon_demand() != b.anon_demand()) {
    throw SimError(ErrorKind::IncomparableScenarios, "workload volumes differ");
  }
}

inline Comparison compare_reports(const MetricsReport& reference, const MetricsReport& candidate) {
  Comparison c;
  c.delta_free_mib = frames_to_mib(candidate.final_free()) - frames_to_mib(reference.final_free());
  c.delta_kills_lmk = candidate.kill_count(Killer::Lmk) - reference.kill_count(Killer::Lmk);
  c.delta_kills_oomk = candidate.kill_count(Killer::Oomk) - reference.kill_count(Killer::Oomk);
  c.delta_official_launch_ms = candidate.mean_launch_ms(Trust::Official) - reference.mean_launch_ms(Trust::Official);
  return c;
}

inline nlohmann::json comparison_json(const Comparison& c, const MetricsReport& a, const MetricsReport& b) {
  return {{"reference", a.scenario},
          {"candidate", b.scenario},
          {"delta_final_free_mib", c.delta_free_mib},
          {"delta_kills_lmk", c.delta_kills_lmk},
          {"delta_kills_oomk", c.delta_kills_oomk},
          {"delta_kills", c.delta_kills_lmk + c.delta_kills_oomk},
          {"delta_mean_official_launch_ms", c.delta_official_launch_ms}};
}

/// Writes into a sibling temp directory and renames it into place, so a
/// failed run never leaves a partial output directory behind.
class StagedDir {
 public:
  explicit StagedDir(std::filesystem::path target) : target_(std::move(target)) {
    staging_ = target_;
    staging_ += ".tmp";
    std::error_code ec;
    std::filesystem::remove_all(staging_, ec);
    if (!std::filesystem::create_directories(staging_, ec) || ec) {
      throw SimError(ErrorKind::IoError, "cannot create " + staging_.string());
    }
  }
  StagedDir(const StagedDir&) = delete;
  StagedDir& operator=(const StagedDir&) = delete;
  ~StagedDir() {
    if (!committed_) {
      std::error_code ec;
      std::filesystem::remove_all(staging_, ec);
    }
  }

  void write(const std::string& name, const std::string& content) {
    std::ofstream f(staging_ / name, std::ios::binary);
    f << content;
    if (!f) throw SimError(ErrorKind::IoError, "cannot write " + (staging_ / name).string());
  }

  void commit() {
    std::error_code ec;
    std::filesystem::remove_all(target_, ec);
    std::filesystem::rename(staging_, target_, ec);
    if (ec) throw SimError(ErrorKind::IoError, "cannot move output to " + target_.string() + ": " + ec.message());
    committed_ = true;
  }

 private:
  std::filesystem::path target_;
  std::filesystem::path staging_;
  bool committed_ = false;
};

inline void write_run(StagedDir& dir, const MetricsReport& r, const Scenario& s, const std::string& prefix = "") {
  dir.write(prefix + "free.csv", free_csv(r));
  dir.write(prefix + "reclaim.csv", reclaim_csv(r));
  dir.write(prefix + "kills.csv", kills_csv(r));
  dir.write(prefix + "launches.csv", launches_csv(r));
  dir.write(prefix + "summary.json", summary_json(r, s).dump(2) + "\n");
}

}  // namespace vnodesim
