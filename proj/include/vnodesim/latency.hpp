#pragma once

#include "vnodesim/types.hpp"

namespace vnodesim {

/// Modeled launch cost. This is a stand-in for wall-clock launch time, not a
/// measurement.
struct LatencyModel {
  double base_ms = 50.0;
  double page_ms = 0.002;     // per frame allocated
  double reclaim_ms = 0.01;   // per frame reclaimed on the launch path
  double kill_ms = 200.0;     // per kill triggered by the launch

  bool operator==(const LatencyModel&) const = default;
};

inline double launch_latency(const LatencyModel& m, FrameCount frames_allocated, FrameCount frames_reclaimed,
                             int kills) {
  return m.base_ms + m.page_ms * static_cast<double>(frames_allocated) +
         m.reclaim_ms * static_cast<double>(frames_reclaimed) + m.kill_ms * kills;
}

}  // namespace vnodesim
