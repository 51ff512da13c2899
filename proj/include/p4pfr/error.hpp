#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace p4pfr {

enum class ErrorKind {
  DegenerateDivisor,
  EigenFailure,
  NotCoplanar,
  DegenerateScene,
  RankDeficient,
  SingularC,
  DegenerateInstance,
  DeflationFailed,
  DistortionSingular,
  GenerationExhausted,
  InvalidInput,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DegenerateDivisor: return "degenerate_divisor";
    case ErrorKind::EigenFailure: return "eigen_failure";
    case ErrorKind::NotCoplanar: return "not_coplanar";
    case ErrorKind::DegenerateScene: return "degenerate_scene";
    case ErrorKind::RankDeficient: return "degenerate_rank_deficient";
    case ErrorKind::SingularC: return "degenerate_singular_c";
    case ErrorKind::DegenerateInstance: return "degenerate_instance";
    case ErrorKind::DeflationFailed: return "deflation_failed";
    case ErrorKind::DistortionSingular: return "distortion_singular";
    case ErrorKind::GenerationExhausted: return "generation_exhausted";
    case ErrorKind::InvalidInput: return "input";
  }
  return "unknown";
}

// Thrown by every stage that can fail on degenerate or malformed input.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace p4pfr
