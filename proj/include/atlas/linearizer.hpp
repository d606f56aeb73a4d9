#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <vector>

#include "family.hpp"
#include "orbit.hpp"

namespace atlas {

enum class Normalization { DerivativeOne, AsymptoticValueToR0 };

inline constexpr int kSeriesDegree = 30;
inline constexpr int kMaxBasinSteps = 1500;

using Series = std::array<cplx, kSeriesDegree + 1>;

namespace series {

inline Series mul(const Series& a, const Series& b) {
  Series c{};
  for (int i = 0; i <= kSeriesDegree; ++i) {
    if (a[i] == cplx{}) continue;
    for (int j = 0; i + j <= kSeriesDegree; ++j) c[i + j] += a[i] * b[j];
  }
  return c;
}

inline Series div(const Series& a, const Series& b) {
  Series c{};
  for (int k = 0; k <= kSeriesDegree; ++k) {
    cplx acc = a[k];
    for (int i = 0; i < k; ++i) acc -= c[i] * b[k - i];
    c[k] = acc / b[0];
  }
  return c;
}

inline std::pair<cplx, cplx> horner(const Series& c, cplx h) {
  cplx v{}, d{};
  for (int k = kSeriesDegree; k >= 0; --k) {
    d = d * h + v;
    v = v * h + c[k];
  }
  return {v, d};
}

// Taylor coefficients of F(h) = f(q+h) - q.
inline Series family_at(const FamilySlice& s, cplx q) {
  Series ep{}, em{};
  const cplx c = std::exp(-2.0 * q);
  double fact = 1.0;
  for (int k = 0; k <= kSeriesDegree; ++k) {
    if (k > 0) fact *= k;
    ep[k] = 1.0 / fact;
    em[k] = c * ((k % 2) ? -1.0 : 1.0) / fact;
  }
  Series num{}, den{};
  for (int k = 0; k <= kSeriesDegree; ++k) {
    num[k] = ep[k] - em[k];
    den[k] = ep[k] / s.lambda - em[k] / s.mu;
  }
  Series F = div(num, den);
  F[0] -= q;
  return F;
}

// Schroder solution b with b(F(h)) = F'(0) b(h), b(h) = h + O(h^2).
inline Series schroder(const Series& F) {
  const cplx m = F[1];
  std::vector<Series> pw(kSeriesDegree + 1);
  pw[1] = F;
  for (int k = 2; k <= kSeriesDegree; ++k) pw[k] = mul(pw[k - 1], F);
  Series b{};
  b[1] = 1.0;
  cplx mk = m;
  for (int k = 2; k <= kSeriesDegree; ++k) {
    mk *= m;
    cplx acc{};
    for (int j = 1; j < k; ++j) acc += b[j] * pw[j][k];
    b[k] = acc / (m - mk);
  }
  return b;
}

}  // namespace series

struct Linearizer {
  FamilySlice slice;
  cplx fixed_point;
  cplx multiplier;
  Normalization normalization = Normalization::DerivativeOne;
  double r0 = 0.0;
  double trap_radius = 0.0;
  cplx distinguished{};  // asymptotic value placed on the level-r0 curve
  cplx scale{1.0, 0.0};
  Series coeffs{};
};

struct KoenigsValue {
  cplx value;
  cplx derivative;
  int steps;
};

inline KoenigsValue koenigs_full(const Linearizer& lin, cplx z) {
  cplx w = z;
  cplx d{1.0, 0.0};
  int n = 0;
  while (std::abs(w - lin.fixed_point) >= lin.trap_radius) {
    if (n >= kMaxBasinSteps) throw Error(Errc::NotInBasin, "orbit does not reach the fixed point");
    const Point p = eval(lin.slice, w);
    if (p.infinite || !is_finite(p.z)) throw Error(Errc::NotInBasin, "orbit meets a pole");
    d *= deriv(lin.slice, w);
    w = p.z;
    ++n;
  }
  const auto [v, dv] = series::horner(lin.coeffs, w - lin.fixed_point);
  const cplx unscale = std::exp(-static_cast<double>(n) * std::log(lin.multiplier));
  return {lin.scale * v * unscale, lin.scale * dv * d * unscale, n};
}

inline cplx koenigs(const Linearizer& lin, cplx z) { return koenigs_full(lin, z).value; }

namespace detail {

inline double pick_trap_radius(const Series& b) {
  double r = 0.25;
  for (int k = kSeriesDegree - 5; k <= kSeriesDegree; ++k) {
    const double a = std::abs(b[k]);
    if (a > 0.0) r = std::min(r, std::pow(1e-17 / a, 1.0 / (k - 1)));
  }
  return r;
}

// Newton on koenigs(z) = zeta starting from y.
inline bool newton_koenigs(const Linearizer& lin, cplx zeta, cplx& y, double tol) {
  for (int it = 0; it < 40; ++it) {
    KoenigsValue kv;
    try {
      kv = koenigs_full(lin, y);
    } catch (const Error&) {
      return false;
    }
    const cplx g = kv.value - zeta;
    if (std::abs(g) <= tol) return true;
    if (kv.derivative == cplx{}) return false;
    y -= g / kv.derivative;
    if (!is_finite(y)) return false;
  }
  return false;
}

}  // namespace detail

inline Linearizer build_linearizer(const FamilySlice& s, cplx fixed_point_seed, Normalization norm,
                                   std::optional<double> r0_target = std::nullopt,
                                   std::optional<cplx> distinguished = std::nullopt) {
  Linearizer lin;
  lin.slice = s;
  lin.normalization = norm;
  const auto [q, m] = refine_cycle(s, fixed_point_seed, 1);
  if (std::abs(m) >= 1.0) throw Error(Errc::NotAttracting, "fixed point is not attracting");
  lin.fixed_point = q;
  lin.multiplier = m;
  lin.coeffs = series::schroder(series::family_at(s, q));
  lin.trap_radius = detail::pick_trap_radius(lin.coeffs);
  if (norm == Normalization::DerivativeOne) {
    lin.distinguished = distinguished.value_or(s.lambda);
    lin.r0 = std::abs(koenigs(lin, lin.distinguished));
  } else {
    if (!r0_target) throw Error(Errc::NoConvergence, "AsymptoticValueToR0 needs a target radius");
    lin.distinguished = distinguished.value_or(s.mu);
    lin.r0 = *r0_target;
    lin.scale = *r0_target / koenigs(lin, lin.distinguished);
  }
  return lin;
}

// Inverse along the segment [0, zeta] from the fixed point; zeta may sit on
// the level-r0 circle itself.
inline cplx koenigs_inverse_continued(const Linearizer& lin, cplx zeta, double tol = 1e-14) {
  cplx y = lin.fixed_point;
  if (zeta == cplx{}) return y;
  const double frac = std::abs(zeta) / lin.r0;
  int steps = std::max(4, static_cast<int>(std::ceil(8.0 * frac)));
  double t = 0.0;
  double dt = 1.0 / steps;
  while (t < 1.0) {
    const double tn = std::min(1.0, t + dt);
    cplx trial = y;
    if (detail::newton_koenigs(lin, zeta * tn, trial, tol * std::max(1.0, std::abs(zeta)))) {
      y = trial;
      t = tn;
    } else {
      dt *= 0.5;
      if (dt < 1e-6) throw Error(Errc::NoConvergence, "koenigs inversion stalled");
    }
  }
  return y;
}

inline cplx koenigs_inverse(const Linearizer& lin, cplx zeta) {
  if (std::abs(zeta) >= lin.r0) throw Error(Errc::OutsideInjectivityDisk, "|zeta| >= r0");
  const cplx y = koenigs_inverse_continued(lin, zeta);
  if (std::abs(koenigs(lin, y) - zeta) > 1e-10) throw Error(Errc::NoConvergence, "round trip failed");
  return y;
}

// Newton from an explicit seed; used for points beyond the injectivity disk.
inline cplx koenigs_solve_from(const Linearizer& lin, cplx zeta, cplx seed) {
  cplx y = seed;
  if (!detail::newton_koenigs(lin, zeta, y, 1e-14 * std::max(1.0, std::abs(zeta))))
    throw Error(Errc::NoConvergence, "koenigs solve from seed failed");
  return y;
}

// True when z lies in the injectivity domain (the component of level < r0
// containing the fixed point).
inline bool in_injectivity_domain(const Linearizer& lin, cplx z) {
  cplx zeta;
  try {
    zeta = koenigs(lin, z);
  } catch (const Error&) {
    return false;
  }
  if (std::abs(zeta) >= lin.r0) return false;
  try {
    const cplx y = koenigs_inverse_continued(lin, zeta, 1e-13);
    return std::abs(y - z) <= 1e-7 * std::max(1.0, std::abs(z));
  } catch (const Error&) {
    return false;
  }
}

struct LevelAngle {
  double r;
  double t;
  int n;
};

inline double wrap_angle(double t) {
  if (t >= kPi) t -= 2.0 * kPi;
  if (t < -kPi) t += 2.0 * kPi;
  return t;
}

inline LevelAngle level_and_angle(const Linearizer& lin, cplx z) {
  const cplx phi = koenigs(lin, z);
  const double r = std::abs(phi);
  const double ar = std::abs(lin.multiplier);
  int n = 0;
  double rn = r;
  while (rn > lin.r0) {
    rn *= ar;
    ++n;
  }
  const cplx pulled = phi * std::pow(lin.multiplier, n);
  return {r, wrap_angle(std::arg(pulled)), n};
}

}  // namespace atlas
