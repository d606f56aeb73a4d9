#pragma once

#include <cmath>
#include <complex>

#include "core.hpp"

namespace atlas {

// Beyond |Re z| > kOverflowGuard the map is replaced by its asymptotic value.
inline constexpr double kOverflowGuard = 50.0;
inline constexpr double kPoleRadius = 1e-12;
inline constexpr int kBranchWindow = 64;

struct FamilySlice {
  cplx rho;
  cplx lambda;
  cplx mu;

  double constraint_residual() const {
    const cplx target = 2.0 / rho;
    return std::abs(1.0 / lambda - 1.0 / mu - target) / std::abs(target);
  }
};

inline FamilySlice make_slice(cplx rho, cplx lambda) {
  const double ar = std::abs(rho);
  if (!(ar > 0.0 && ar < 1.0)) throw Error(Errc::BadMultiplier, "|rho| must lie in (0,1)");
  if (lambda == cplx{}) throw Error(Errc::DegenerateParameter, "lambda = 0");
  const cplx inv_mu = 1.0 / lambda - 2.0 / rho;
  if (std::abs(inv_mu) <= 1e-13 * std::abs(2.0 / rho))
    throw Error(Errc::DegenerateParameter, "lambda = rho/2");
  return FamilySlice{rho, lambda, 1.0 / inv_mu};
}

// Principal logarithm with Im in (-pi, pi]; a negative zero imaginary part
// is read as +0 so that the negative real axis maps to +pi.
inline cplx principal_log(cplx u) {
  if (u.imag() == 0.0) u = cplx{u.real(), 0.0};
  return std::log(u);
}

// Principal pole p_0 = 1/2 Log(lambda/mu); the others are p_0 + j*pi*i.
inline cplx pole(const FamilySlice& s, int j) {
  return 0.5 * principal_log(s.lambda / s.mu) + kI * (kPi * j);
}

inline double distance_to_poles(const FamilySlice& s, cplx z) {
  cplx d = z - pole(s, 0);
  d -= kI * (kPi * std::round(d.imag() / kPi));
  return std::abs(d);
}

namespace detail {

// f = M(e^{2z}) with M(u) = (u-1)/(u/lambda - 1/mu); the exponent is chosen
// so that it never overflows. Returns numerator, denominator and the weight
// u (or v = 1/u) appearing in f'.
struct MobiusParts {
  cplx num, den, weight;
};

inline MobiusParts mobius_parts(const FamilySlice& s, cplx z) {
  if (z.real() >= 0.0) {
    const cplx v = std::exp(-2.0 * z);
    return {1.0 - v, 1.0 / s.lambda - v / s.mu, v};
  }
  const cplx u = std::exp(2.0 * z);
  return {u - 1.0, u / s.lambda - 1.0 / s.mu, u};
}

}  // namespace detail

inline Point eval(const FamilySlice& s, cplx z) {
  if (z.real() > kOverflowGuard) return Point{s.lambda};
  if (z.real() < -kOverflowGuard) return Point{s.mu};
  if (distance_to_poles(s, z) < kPoleRadius) return Point::inf();
  const auto p = detail::mobius_parts(s, z);
  if (p.den == cplx{}) return Point::inf();
  return Point{p.num / p.den};
}

inline Point eval(const FamilySlice& s, const Point& z) {
  if (z.infinite) return Point::inf();
  return eval(s, z.z);
}

// Finite-valued evaluation; throws at poles.
inline cplx evalf(const FamilySlice& s, cplx z) {
  const Point p = eval(s, z);
  if (p.infinite) throw Error(Errc::InfinityFlag, "orbit reached a pole");
  return p.z;
}

inline cplx deriv(const FamilySlice& s, cplx z) {
  if (std::abs(z.real()) > kOverflowGuard) return cplx{};
  if (distance_to_poles(s, z) < kPoleRadius) throw Error(Errc::InfinityFlag, "derivative at a pole");
  const auto p = detail::mobius_parts(s, z);
  const cplx c = 1.0 / s.lambda - 1.0 / s.mu;
  return 2.0 * c * p.weight / (p.den * p.den);
}

inline cplx inverse_branch(const FamilySlice& s, int j, const Point& w) {
  if (w.infinite) return pole(s, j);
  const double tl = 1e-15 * std::max(1.0, std::abs(s.lambda));
  const double tm = 1e-15 * std::max(1.0, std::abs(s.mu));
  if (std::abs(w.z - s.lambda) <= tl || std::abs(w.z - s.mu) <= tm)
    throw Error(Errc::AsymptoticValueHit, "no preimage of an asymptotic value");
  const cplx u = (w.z / s.mu - 1.0) / (w.z / s.lambda - 1.0);
  return 0.5 * principal_log(u) + kI * (kPi * j);
}

inline cplx inverse_branch(const FamilySlice& s, int j, cplx w) { return inverse_branch(s, j, Point{w}); }

inline int branch_index(const FamilySlice& s, cplx z) {
  const Point w = eval(s, z);
  if (w.infinite) throw Error(Errc::Unresolvable, "branch index at a pole");
  cplx base;
  try {
    base = inverse_branch(s, 0, w);
  } catch (const Error&) {
    throw Error(Errc::Unresolvable, "image is an asymptotic value");
  }
  const double tol = 1e-8 * std::max(1.0, std::abs(z));
  const int j0 = static_cast<int>(std::lround((z.imag() - base.imag()) / kPi));
  for (int d = 0; d <= 2 * kBranchWindow; ++d) {
    const int j = j0 + ((d % 2) ? (d + 1) / 2 : -(d / 2));
    if (std::abs(j) > kBranchWindow) continue;
    if (std::abs(base + kI * (kPi * j) - z) <= tol) return j;
  }
  throw Error(Errc::Unresolvable, "no branch reproduces the point");
}

}  // namespace atlas
