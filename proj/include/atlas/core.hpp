#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace atlas {

using cplx = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr cplx kI{0.0, 1.0};

enum class Errc {
  DegenerateParameter,
  BadMultiplier,
  AsymptoticValueHit,
  InfinityFlag,
  Unresolvable,
  NoConvergence,
  NotAttracting,
  NotInBasin,
  OutsideInjectivityDisk,
  NoSolutionInWindow,
  InadmissibleWord,
  NotInK0,
  NotInShiftLocus,
  WrongNormalizationSide,
  LeftShiftLocus,
  CollapsedToAttracting,
  NotRepelling,
  ContinuationStalled,
  ParseError,
};

inline const char* errc_name(Errc e) {
  switch (e) {
    case Errc::DegenerateParameter: return "DegenerateParameter";
    case Errc::BadMultiplier: return "BadMultiplier";
    case Errc::AsymptoticValueHit: return "AsymptoticValueHit";
    case Errc::InfinityFlag: return "InfinityFlag";
    case Errc::Unresolvable: return "Unresolvable";
    case Errc::NoConvergence: return "NoConvergence";
    case Errc::NotAttracting: return "NotAttracting";
    case Errc::NotInBasin: return "NotInBasin";
    case Errc::OutsideInjectivityDisk: return "OutsideInjectivityDisk";
    case Errc::NoSolutionInWindow: return "NoSolutionInWindow";
    case Errc::InadmissibleWord: return "InadmissibleWord";
    case Errc::NotInK0: return "NotInK0";
    case Errc::NotInShiftLocus: return "NotInShiftLocus";
    case Errc::WrongNormalizationSide: return "WrongNormalizationSide";
    case Errc::LeftShiftLocus: return "LeftShiftLocus";
    case Errc::CollapsedToAttracting: return "CollapsedToAttracting";
    case Errc::NotRepelling: return "NotRepelling";
    case Errc::ContinuationStalled: return "ContinuationStalled";
    case Errc::ParseError: return "ParseError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

// A point of the Riemann sphere: finite value or the point at infinity.
struct Point {
  cplx z{};
  bool infinite = false;

  static Point inf() { return Point{cplx{}, true}; }
  bool finite() const { return !infinite; }
};

inline bool is_finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

}  // namespace atlas
