#pragma once

// Scenario files: a line-oriented text format with named sections.
//
//   [memory]        total_mib, page_kib
//   [topology]      mode = baseline | nodes_mib = a, b, ...; cpus = cpu:node, ...
//   [kernel]        reserve_mib (taken from node 0 at boot)
//   [watermarks]    min_floor_frames, min_divisor
//   [reclaim]       writeback_frames_per_tick
//   [lmk]           scope, minfree_frames, adj_ladder
//   [adj]           <state> = <adj> overrides
//   [latency]       base_ms, page_ms, reclaim_ms, kill_ms
//   [run]           name, seed, sample_every
//   [app NAME]      trust, state, anon_mib
//   [events]        "<tick> <action> [args...]" one per line
//
// Event actions: spawn APP | set_state APP STATE | alloc_anon APP MIB |
// file_io APP total_mib=X rate_frames=Y [jitter=J] | sample | end

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "vnodesim/frames.hpp"
#include "vnodesim/killers.hpp"
#include "vnodesim/latency.hpp"
#include "vnodesim/lifecycle.hpp"

namespace vnodesim {

enum class EventAction : std::uint8_t { Spawn, SetState, AllocAnon, FileIo, Sample, End };

inline const char* to_string(EventAction a) {
  switch (a) {
    case EventAction::Spawn: return "spawn";
    case EventAction::SetState: return "set_state";
    case EventAction::AllocAnon: return "alloc_anon";
    case EventAction::FileIo: return "file_io";
    case EventAction::Sample: return "sample";
    case EventAction::End: return "end";
  }
  return "?";
}

struct AppSpec {
  std::string name;
  Trust trust = Trust::Official;
  LifecycleState state = LifecycleState::Foreground;
  FrameCount anon_frames = 0;

  bool operator==(const AppSpec&) const = default;
};

struct EventSpec {
  Tick tick = 0;
  EventAction action = EventAction::End;
  std::string app;
  LifecycleState state = LifecycleState::Foreground;  // set_state
  FrameCount frames = 0;                              // alloc_anon size, file_io total
  FrameCount rate = 0;                                // file_io frames per tick
  double jitter = 0.0;                                // file_io relative rate jitter

  bool operator==(const EventSpec&) const = default;
};

struct Scenario {
  std::string name = "scenario";
  FrameCount total_frames = 0;
  bool baseline = true;
  std::vector<FrameCount> node_frames;  // empty in baseline mode
  std::map<int, NodeId> cpus;
  FrameCount kernel_frames = 0;
  WatermarkPolicy watermarks;
  FrameCount writeback_per_tick = 2048;
  LmkConfig lmk;
  AdjTable adj;
  LatencyModel latency;
  std::uint64_t seed = 1;
  Tick sample_every = 10;
  std::vector<AppSpec> apps;
  std::vector<EventSpec> events;

  std::vector<FrameCount> node_sizes() const {
    return baseline ? std::vector<FrameCount>{total_frames} : node_frames;
  }
  const AppSpec* app(std::string_view n) const {
    for (const auto& a : apps) {
      if (a.name == n) return &a;
    }
    return nullptr;
  }
  /// Tick of the END event, implied at the last event tick when absent.
  Tick end_tick() const {
    Tick t = 0;
    for (const auto& e : events) t = std::max(t, e.tick);
    return t;
  }
  FrameCount file_io_volume() const {
    FrameCount v = 0;
    for (const auto& e : events) {
      if (e.action == EventAction::FileIo) v += e.frames;
    }
    return v;
  }
  FrameCount anon_demand() const {
    FrameCount v = 0;
    for (const auto& e : events) {
      if (e.action == EventAction::Spawn) {
        if (const auto* a = app(e.app)) v += a->anon_frames;
      } else if (e.action == EventAction::AllocAnon) {
        v += e.frames;
      }
    }
    return v;
  }

  bool operator==(const Scenario&) const = default;
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::vector<std::string> words(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

/// Shortest representation that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

inline std::string format_mib(FrameCount frames) {
  return format_double(static_cast<double>(frames) / static_cast<double>(kFramesPerMiB));
}

struct Issues {
  std::vector<std::string> list;
  void add(std::string msg) { list.push_back(std::move(msg)); }
  bool empty() const { return list.empty(); }
  std::string joined() const {
    std::string s;
    for (const auto& m : list) s += (s.empty() ? "" : "; ") + m;
    return s;
  }
};

/// MiB value -> whole frames; records an issue when it does not divide.
inline FrameCount mib_field(std::string_view text, const std::string& field, Issues& issues) {
  double mib = 0;
  if (!parse_number(text, mib) || !std::isfinite(mib)) {
    issues.add(field + ": not a number '" + std::string(text) + "'");
    return 0;
  }
  const double frames = mib * static_cast<double>(kFramesPerMiB);
  if (frames != std::floor(frames)) {
    issues.add(field + ": " + std::string(text) + " MiB is not a whole number of 4 KiB frames");
    return 0;
  }
  return static_cast<FrameCount>(frames);
}

template <typename T>
T int_field(std::string_view text, const std::string& field, Issues& issues) {
  T v{};
  if (!parse_number(text, v)) issues.add(field + ": not an integer '" + std::string(text) + "'");
  return v;
}

inline double double_field(std::string_view text, const std::string& field, Issues& issues) {
  double v = 0;
  if (!parse_number(text, v) || !std::isfinite(v)) issues.add(field + ": not a number '" + std::string(text) + "'");
  return v;
}

}  // namespace detail

/// Semantic checks over an assembled scenario; every problem is reported.
inline std::vector<std::string> validate_scenario(const Scenario& s) {
  detail::Issues issues;
  if (s.total_frames <= 0) issues.add("memory.total_mib: must be positive");
  if (!s.baseline) {
    if (s.node_frames.empty()) issues.add("topology.nodes_mib: at least one node required");
    FrameCount sum = 0;
    for (std::size_t i = 0; i < s.node_frames.size(); ++i) {
      if (s.node_frames[i] <= 0) issues.add("topology.nodes_mib[" + std::to_string(i) + "]: must be positive");
      sum += s.node_frames[i];
    }
    if (sum != s.total_frames) {
      issues.add("topology.nodes_mib: node sizes sum to " + detail::format_mib(sum) + " MiB but memory.total_mib is " +
                 detail::format_mib(s.total_frames));
    }
  }
  const auto sizes = s.node_sizes();
  for (const auto& [cpu, node] : s.cpus) {
    if (cpu < 0) issues.add("topology.cpus: negative cpu " + std::to_string(cpu));
    if (node < 0 || static_cast<std::size_t>(node) >= sizes.size()) {
      issues.add("topology.cpus: cpu " + std::to_string(cpu) + " bound to unknown node " + std::to_string(node));
    }
  }
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (sizes[i] <= 0) continue;
    try {
      s.watermarks.compute(sizes[i]);
    } catch (const SimError& e) {
      issues.add("watermarks: node " + std::to_string(i) + ": " + e.what());
    }
  }
  if (s.kernel_frames < 0 || (!sizes.empty() && s.kernel_frames >= sizes[0])) {
    issues.add("kernel.reserve_mib: must be non-negative and smaller than node 0");
  }
  if (s.writeback_per_tick < 0) issues.add("reclaim.writeback_frames_per_tick: must be non-negative");
  try {
    s.lmk.validate();
  } catch (const SimError& e) {
    issues.add(std::string("lmk: ") + e.what());
  }
  try {
    s.adj.validate();
  } catch (const SimError& e) {
    issues.add(std::string("adj: ") + e.what());
  }
  const auto& l = s.latency;
  if (l.base_ms < 0 || l.page_ms < 0 || l.reclaim_ms < 0 || l.kill_ms < 0) {
    issues.add("latency: constants must be non-negative");
  }
  if (s.sample_every < 0) issues.add("run.sample_every: must be non-negative");

  std::set<std::string> names;
  for (const auto& a : s.apps) {
    if (!names.insert(a.name).second) issues.add("app " + a.name + ": duplicate name");
    if (a.anon_frames < 0) issues.add("app " + a.name + ".anon_mib: must be non-negative");
  }

  std::set<std::string> spawned;
  int ends = 0;
  const Tick last = s.end_tick();
  for (std::size_t i = 0; i < s.events.size(); ++i) {
    const auto& e = s.events[i];
    const std::string where = "events[" + std::to_string(i) + "] (" + to_string(e.action) + ")";
    if (e.tick < 0) issues.add(where + ": negative tick");
    const bool needs_app = e.action != EventAction::Sample && e.action != EventAction::End;
    if (needs_app && !s.app(e.app)) issues.add(where + ": unknown app '" + e.app + "'");
    switch (e.action) {
      case EventAction::Spawn:
        if (!spawned.insert(e.app).second) issues.add(where + ": app '" + e.app + "' spawned twice");
        break;
      case EventAction::AllocAnon:
        if (e.frames < 1) issues.add(where + ": size must be at least one frame");
        break;
      case EventAction::FileIo:
        if (e.frames < 1) issues.add(where + ": total_mib must be at least one frame");
        if (e.rate < 1) issues.add(where + ": rate_frames must be >= 1");
        if (e.jitter < 0 || e.jitter >= 1) issues.add(where + ": jitter must be in [0, 1)");
        break;
      case EventAction::End:
        ++ends;
        if (e.tick != last) issues.add(where + ": end must be the last event");
        break;
      default:
        break;
    }
  }
  if (ends > 1) issues.add("events: more than one end");
  return issues.list;
}

inline Scenario parse_scenario_text(std::string_view text, const std::string& origin = "<scenario>") {
  using namespace detail;
  Scenario s;
  Issues syntax;
  Issues semantic;
  std::set<std::string> seen_sections;
  std::string section;
  std::string app_name;
  std::map<std::string, std::size_t> app_index;

  std::istringstream in{std::string(text)};
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string at = origin + ":" + std::to_string(lineno);
    std::string line = raw;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') {
        syntax.add(at + ": unterminated section header");
        continue;
      }
      const auto parts = words(line.substr(1, line.size() - 2));
      if (parts.empty()) {
        syntax.add(at + ": empty section header");
        continue;
      }
      section = parts[0];
      static const std::set<std::string> known = {"memory",  "topology", "kernel", "watermarks", "reclaim",
                                                  "lmk",     "adj",      "latency", "run",       "events",
                                                  "app"};
      if (!known.count(section)) {
        syntax.add(at + ": unknown section [" + section + "]");
        section.clear();
        continue;
      }
      if (section == "app") {
        if (parts.size() != 2) {
          syntax.add(at + ": expected [app NAME]");
          section.clear();
          continue;
        }
        app_name = parts[1];
        if (app_index.count(app_name)) {
          semantic.add("app " + app_name + ": duplicate name");
        } else {
          app_index[app_name] = s.apps.size();
          s.apps.push_back(AppSpec{app_name});
        }
      } else if (!seen_sections.insert(section).second) {
        syntax.add(at + ": duplicate section [" + section + "]");
      }
      continue;
    }
    if (section.empty()) {
      syntax.add(at + ": content outside a section");
      continue;
    }

    if (section == "events") {
      const auto w = words(line);
      EventSpec e;
      if (w.size() < 2 || !parse_number(w[0], e.tick)) {
        syntax.add(at + ": expected '<tick> <action> ...'");
        continue;
      }
      const std::string& act = w[1];
      auto want = [&](std::size_t n) {
        if (w.size() != n) syntax.add(at + ": '" + act + "' takes " + std::to_string(n - 2) + " argument(s)");
        return w.size() == n;
      };
      if (act == "spawn") {
        if (!want(3)) continue;
        e.action = EventAction::Spawn;
        e.app = w[2];
      } else if (act == "set_state") {
        if (!want(4)) continue;
        e.action = EventAction::SetState;
        e.app = w[2];
        if (auto st = parse_state(w[3])) e.state = *st; else syntax.add(at + ": unknown state '" + w[3] + "'");
      } else if (act == "alloc_anon") {
        if (!want(4)) continue;
        e.action = EventAction::AllocAnon;
        e.app = w[2];
        e.frames = mib_field(w[3], at + " alloc_anon size", semantic);
      } else if (act == "file_io") {
        if (w.size() < 3) {
          syntax.add(at + ": file_io needs an app");
          continue;
        }
        e.action = EventAction::FileIo;
        e.app = w[2];
        bool have_total = false, have_rate = false;
        for (std::size_t i = 3; i < w.size(); ++i) {
          const auto kv = split(w[i], '=');
          if (kv.size() != 2) {
            syntax.add(at + ": expected key=value, got '" + w[i] + "'");
            continue;
          }
          if (kv[0] == "total_mib") {
            e.frames = mib_field(kv[1], at + " file_io total_mib", semantic);
            have_total = true;
          } else if (kv[0] == "rate_frames") {
            e.rate = int_field<FrameCount>(kv[1], at + " file_io rate_frames", semantic);
            have_rate = true;
          } else if (kv[0] == "jitter") {
            e.jitter = double_field(kv[1], at + " file_io jitter", semantic);
          } else {
            syntax.add(at + ": unknown file_io key '" + kv[0] + "'");
          }
        }
        if (!have_total || !have_rate) syntax.add(at + ": file_io requires total_mib and rate_frames");
      } else if (act == "sample") {
        if (!want(2)) continue;
        e.action = EventAction::Sample;
      } else if (act == "end") {
        if (!want(2)) continue;
        e.action = EventAction::End;
      } else {
        syntax.add(at + ": unknown event action '" + act + "'");
        continue;
      }
      s.events.push_back(std::move(e));
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      syntax.add(at + ": expected key = value");
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::string field = (section == "app" ? "app " + app_name : section) + "." + key;

    auto list_of = [&](auto parse_one) {
      for (const auto& item : split(value, ',')) parse_one(item);
    };
    bool known_key = true;
    if (section == "memory") {
      if (key == "total_mib") s.total_frames = mib_field(value, field, semantic);
      else if (key == "page_kib") {
        if (int_field<int>(value, field, semantic) != 4) semantic.add(field + ": only 4 KiB pages are supported");
      } else known_key = false;
    } else if (section == "topology") {
      if (key == "mode") {
        if (value == "baseline") s.baseline = true;
        else if (value == "partitioned") s.baseline = false;
        else semantic.add(field + ": expected baseline or partitioned");
      } else if (key == "nodes_mib") {
        s.baseline = false;
        s.node_frames.clear();
        list_of([&](const std::string& v) { s.node_frames.push_back(mib_field(v, field, semantic)); });
      } else if (key == "cpus") {
        list_of([&](const std::string& v) {
          const auto kv = split(v, ':');
          if (kv.size() != 2) {
            semantic.add(field + ": expected cpu:node, got '" + v + "'");
            return;
          }
          s.cpus[int_field<int>(kv[0], field, semantic)] = int_field<NodeId>(kv[1], field, semantic);
        });
      } else known_key = false;
    } else if (section == "kernel") {
      if (key == "reserve_mib") s.kernel_frames = mib_field(value, field, semantic);
      else known_key = false;
    } else if (section == "watermarks") {
      if (key == "min_floor_frames") s.watermarks.min_floor = int_field<FrameCount>(value, field, semantic);
      else if (key == "min_divisor") s.watermarks.min_divisor = int_field<FrameCount>(value, field, semantic);
      else known_key = false;
    } else if (section == "reclaim") {
      if (key == "writeback_frames_per_tick") s.writeback_per_tick = int_field<FrameCount>(value, field, semantic);
      else known_key = false;
    } else if (section == "lmk") {
      if (key == "scope") {
        if (value == "global") s.lmk.scope = KillScope::Global;
        else if (value == "per_node") s.lmk.scope = KillScope::PerNode;
        else semantic.add(field + ": expected global or per_node");
      } else if (key == "minfree_frames") {
        s.lmk.minfree.clear();
        list_of([&](const std::string& v) { s.lmk.minfree.push_back(int_field<FrameCount>(v, field, semantic)); });
      } else if (key == "adj_ladder") {
        s.lmk.adj_ladder.clear();
        list_of([&](const std::string& v) { s.lmk.adj_ladder.push_back(int_field<int>(v, field, semantic)); });
      } else known_key = false;
    } else if (section == "adj") {
      if (auto st = parse_state(key)) s.adj.values[static_cast<std::size_t>(*st)] = int_field<int>(value, field, semantic);
      else known_key = false;
    } else if (section == "latency") {
      if (key == "base_ms") s.latency.base_ms = double_field(value, field, semantic);
      else if (key == "page_ms") s.latency.page_ms = double_field(value, field, semantic);
      else if (key == "reclaim_ms") s.latency.reclaim_ms = double_field(value, field, semantic);
      else if (key == "kill_ms") s.latency.kill_ms = double_field(value, field, semantic);
      else known_key = false;
    } else if (section == "run") {
      if (key == "name") s.name = value;
      else if (key == "seed") s.seed = int_field<std::uint64_t>(value, field, semantic);
      else if (key == "sample_every") s.sample_every = int_field<Tick>(value, field, semantic);
      else known_key = false;
    } else if (section == "app") {
      auto it = app_index.find(app_name);
      if (it == app_index.end()) continue;
      AppSpec& a = s.apps[it->second];
      if (key == "trust") {
        if (auto t = parse_trust(value)) a.trust = *t; else semantic.add(field + ": expected official or untrusted");
      } else if (key == "state") {
        if (auto st = parse_state(value)) a.state = *st; else semantic.add(field + ": unknown state '" + value + "'");
      } else if (key == "anon_mib") {
        a.anon_frames = mib_field(value, field, semantic);
      } else known_key = false;
    }
    if (!known_key) syntax.add(at + ": unknown key '" + key + "' in [" + section + "]");
  }

  for (const char* required : {"memory", "topology", "events"}) {
    if (!seen_sections.count(required)) syntax.add(origin + ": missing [" + std::string(required) + "] section");
  }
  if (!syntax.empty()) throw SimError(ErrorKind::ParseError, syntax.joined());

  for (auto& msg : validate_scenario(s)) semantic.add(std::move(msg));
  if (!semantic.empty()) throw SimError(ErrorKind::ValidationError, semantic.joined());
  return s;
}

inline Scenario parse_scenario(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw SimError(ErrorKind::IoError, "cannot read " + path);
  std::stringstream buf;
  buf << f.rdbuf();
  return parse_scenario_text(buf.str(), path);
}

/// Canonical writer; parse_scenario_text(emit_scenario(s)) == s.
inline std::string emit_scenario(const Scenario& s) {
  using detail::format_double;
  using detail::format_mib;
  std::ostringstream o;
  auto join = [](const auto& xs, auto fmt) {
    std::string r;
    for (const auto& x : xs) r += (r.empty() ? "" : ", ") + fmt(x);
    return r;
  };
  auto num = [](auto v) { return std::to_string(v); };

  o << "[run]\nname = " << s.name << "\nseed = " << s.seed << "\nsample_every = " << s.sample_every << "\n\n";
  o << "[memory]\ntotal_mib = " << format_mib(s.total_frames) << "\npage_kib = 4\n\n";
  o << "[topology]\n";
  if (s.baseline) o << "mode = baseline\n";
  else o << "nodes_mib = " << join(s.node_frames, format_mib) << "\n";
  if (!s.cpus.empty()) {
    o << "cpus = "
      << join(s.cpus, [](const auto& kv) { return std::to_string(kv.first) + ":" + std::to_string(kv.second); })
      << "\n";
  }
  o << "\n[kernel]\nreserve_mib = " << format_mib(s.kernel_frames) << "\n\n";
  o << "[watermarks]\nmin_floor_frames = " << s.watermarks.min_floor << "\nmin_divisor = " << s.watermarks.min_divisor
    << "\n\n";
  o << "[reclaim]\nwriteback_frames_per_tick = " << s.writeback_per_tick << "\n\n";
  o << "[lmk]\nscope = " << to_string(s.lmk.scope) << "\nminfree_frames = " << join(s.lmk.minfree, num)
    << "\nadj_ladder = " << join(s.lmk.adj_ladder, num) << "\n\n";
  o << "[adj]\n";
  for (auto st : kAllStates) o << to_string(st) << " = " << s.adj(st) << "\n";
  o << "\n[latency]\nbase_ms = " << format_double(s.latency.base_ms) << "\npage_ms = "
    << format_double(s.latency.page_ms) << "\nreclaim_ms = " << format_double(s.latency.reclaim_ms)
    << "\nkill_ms = " << format_double(s.latency.kill_ms) << "\n\n";
  for (const auto& a : s.apps) {
    o << "[app " << a.name << "]\ntrust = " << to_string(a.trust) << "\nstate = " << to_string(a.state)
      << "\nanon_mib = " << format_mib(a.anon_frames) << "\n\n";
  }
  o << "[events]\n";
  for (const auto& e : s.events) {
    o << e.tick << " " << to_string(e.action);
    switch (e.action) {
      case EventAction::Spawn: o << " " << e.app; break;
      case EventAction::SetState: o << " " << e.app << " " << to_string(e.state); break;
      case EventAction::AllocAnon: o << " " << e.app << " " << format_mib(e.frames); break;
      case EventAction::FileIo:
        o << " " << e.app << " total_mib=" << format_mib(e.frames) << " rate_frames=" << e.rate;
        if (e.jitter != 0.0) o << " jitter=" << format_double(e.jitter);
        break;
      default: break;
    }
    o << "\n";
  }
  return o.str();
}

}  // namespace vnodesim
