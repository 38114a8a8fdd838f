#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace vnodesim {

using FrameId = std::uint32_t;
using FrameCount = std::int64_t;
using NodeId = std::int32_t;
using Pid = std::int32_t;
using Tick = std::int64_t;

inline constexpr std::int64_t kPageSize = 4096;
inline constexpr FrameCount kFramesPerMiB = (1 << 20) / kPageSize;

/// Owner sentinels for frames not held by a process.
inline constexpr Pid kOwnerFree = -1;
inline constexpr Pid kOwnerKernel = -2;

inline constexpr double frames_to_mib(FrameCount frames) {
  return static_cast<double>(frames) * kPageSize / static_cast<double>(1 << 20);
}

inline constexpr FrameCount mib_to_frames(std::int64_t mib) { return mib * kFramesPerMiB; }

enum class ErrorKind {
  EmptyRange,
  OverlapError,
  CoverageError,
  DuplicateNodeId,
  UnknownNode,
  ZeroCount,
  DoubleFree,
  NotFilePage,
  DeadProcess,
  UnknownProcess,
  InvalidConfig,
  ParseError,
  ValidationError,
  IncomparableScenarios,
  IoError,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::EmptyRange: return "EmptyRange";
    case ErrorKind::OverlapError: return "OverlapError";
    case ErrorKind::CoverageError: return "CoverageError";
    case ErrorKind::DuplicateNodeId: return "DuplicateNodeId";
    case ErrorKind::UnknownNode: return "UnknownNode";
    case ErrorKind::ZeroCount: return "ZeroCount";
    case ErrorKind::DoubleFree: return "DoubleFree";
    case ErrorKind::NotFilePage: return "NotFilePage";
    case ErrorKind::DeadProcess: return "DeadProcess";
    case ErrorKind::UnknownProcess: return "UnknownProcess";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ValidationError: return "ValidationError";
    case ErrorKind::IncomparableScenarios: return "IncomparableScenarios";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

class SimError : public std::runtime_error {
 public:
  SimError(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace vnodesim
