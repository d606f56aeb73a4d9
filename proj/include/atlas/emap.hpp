#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "family.hpp"
#include "linearizer.hpp"
#include "model.hpp"
#include "orbit.hpp"

namespace atlas {

// Linearizer of f_lambda at 0 normalized so that phi_lambda(mu) = r0.
struct ShiftChart {
  FamilySlice slice;
  Linearizer lin;
  double lambda_level = 0.0;  // |phi_lambda(lambda)|
  double ratio = 0.0;         // |phi_lambda(lambda)| / |phi_lambda(mu)|
};

inline ShiftChart shift_chart(const ModelMap& m, cplx lambda) {
  ShiftChart c;
  c.slice = make_slice(m.rho(), lambda);
  try {
    c.lin = build_linearizer(c.slice, cplx{}, Normalization::AsymptoticValueToR0, m.r0, c.slice.mu);
    c.lambda_level = std::abs(koenigs(c.lin, lambda));
  } catch (const Error& e) {
    if (e.code() == Errc::NotInBasin) throw Error(Errc::NotInShiftLocus, "an asymptotic value is not attracted to 0");
    throw;
  }
  c.ratio = c.lambda_level / m.r0;
  return c;
}

// ---------------------------------------------------------------------------
// Intrinsic itinerary labels in the dynamic plane of f_lambda.
//
// Labels are read from the principal preimage and then corrected by the
// winding number of T(f(y)) around the loop made of the gradient curve
// l_lambda (angle 0, from mu to infinity), a chord to the image of lambda and
// the image of the principal cut, all drawn in the plane of
// T = 1/(u-1), u = (w/mu - 1)/(w/lambda - 1).

struct LabelContext {
  const ShiftChart* chart = nullptr;
  std::vector<cplx> loop;  // closed polygon in the T-plane
};

inline cplx t_coordinate(const FamilySlice& s, cplx w) {
  const cplx u = (w / s.mu - 1.0) / (w / s.lambda - 1.0);
  return 1.0 / (u - 1.0);
}

inline LabelContext label_context(const ModelMap& m, const ShiftChart& c, int samples = 400) {
  LabelContext ctx;
  ctx.chart = &c;
  const FamilySlice& s = c.slice;
  const double ar = std::abs(s.rho);
  std::vector<cplx> cut;
  cplx y{}, v{};
  for (int i = 1; i <= samples; ++i) {
    const double frac = std::min(static_cast<double>(i) / samples, 1.0 - 1e-9);
    y = koenigs_solve_from(c.lin, cplx{m.r0 * frac, 0.0}, y);
    const cplx b = inverse_branch(s, 0, y);
    const double k = std::round((v.imag() - b.imag()) / kPi);
    cplx best = b + kI * (kPi * k);
    for (double dk : {-1.0, 1.0}) {
      const cplx cand = b + kI * (kPi * (k + dk));
      if (std::abs(cand - v) < std::abs(best - v)) best = cand;
    }
    v = best;
    if (frac >= ar) cut.push_back(t_coordinate(s, v));
  }
  // beyond the last sample the cut runs off horizontally in the left tract
  for (double x = 1.0; x <= 1e5; x *= 1.1) cut.push_back(t_coordinate(s, v - x));
  const cplx tau = 1.0 / (s.lambda / s.mu - 1.0);
  ctx.loop.push_back(cplx{-1.0, 0.0});
  ctx.loop.insert(ctx.loop.end(), cut.begin(), cut.end());
  ctx.loop.push_back(tau);
  for (int i = 1; i < 64; ++i) ctx.loop.push_back(tau * (1.0 - i / 64.0));
  for (int i = 0; i < 64; ++i) ctx.loop.push_back(cplx{-i / 64.0, 0.0});
  return ctx;
}

inline int winding_number(const std::vector<cplx>& loop, cplx p) {
  double a = 0.0;
  const std::size_t n = loop.size();
  for (std::size_t i = 0; i < n; ++i) {
    const cplx z1 = loop[i] - p, z2 = loop[(i + 1) % n] - p;
    if (z1 == cplx{} || z2 == cplx{}) continue;
    a += std::arg(z2 / z1);
  }
  return static_cast<int>(std::lround(a / (2.0 * kPi)));
}

inline constexpr double kTractProbe = 1e3;

// Model-consistent label of y, whose image is v = f_lambda(y).
inline int intrinsic_label(const LabelContext& ctx, cplx y, cplx v) {
  const FamilySlice& s = ctx.chart->slice;
  if (std::abs(y.real()) > 18.0) {
    // f(y) rounds to an asymptotic value; u = e^{2y} exactly, so T sits next
    // to the loop vertex -1 (left tract) or 0 (right tract)
    const double a = 2.0 * y.imag();
    const int kp = static_cast<int>(std::lround((y.imag() - 0.5 * std::arg(std::polar(1.0, a))) / kPi));
    const cplx t = y.real() < 0.0 ? cplx{-1.0, 0.0} - std::polar(1e-9, a) : std::polar(1e-9, -a);
    return -(kp + winding_number(ctx.loop, t));
  }
  const cplx b = inverse_branch(s, 0, v);
  const int kp = static_cast<int>(std::lround((y.imag() - b.imag()) / kPi));
  // far out in the left tract only the cut tail is nearby; T resolves it at moderate depth
  const cplx vt = v.real() < -kTractProbe ? cplx{-kTractProbe, v.imag()} : v;
  const int wn = winding_number(ctx.loop, t_coordinate(s, vt));
  return -(kp + wn);
}

struct IntrinsicItinerary {
  std::vector<int> word;
  cplx landed;  // f^n(lambda), inside O_lambda
  cplx zeta;    // phi_lambda(f^n(lambda))
};

inline IntrinsicItinerary intrinsic_itinerary(const ModelMap& m, const ShiftChart& c, const LabelContext& ctx) {
  (void)m;
  IntrinsicItinerary it;
  cplx w = c.slice.lambda;
  for (int k = 0; k < 200 && !in_injectivity_domain(c.lin, w); ++k) {
    const cplx v = evalf(c.slice, w);
    it.word.push_back(intrinsic_label(ctx, w, v));
    w = v;
  }
  if (!in_injectivity_domain(c.lin, w)) throw Error(Errc::NotInShiftLocus, "orbit of lambda never enters O_lambda");
  it.landed = w;
  it.zeta = koenigs(c.lin, w);
  return it;
}

// ---------------------------------------------------------------------------
// E(lambda) = xi_lambda(lambda).

struct EValue {
  cplx value;
  std::vector<int> word;  // intrinsic itinerary of lambda
  double level = 0.0;     // |phi_lambda(lambda)|
};

inline void require_lambda_side(const ShiftChart& c) {
  if (!(c.ratio > 1.0 + 1e-9)) throw Error(Errc::WrongNormalizationSide, "lambda is not in S0_lambda");
}

inline EValue E_map(const ModelMap& m, cplx lambda, const IterationBudget& budget = {}) {
  const ParameterClass pc = classify_parameter(m.rho(), lambda, budget);
  if (pc.region != Region::Shift) throw Error(Errc::NotInShiftLocus, "lambda is not in the shift locus");
  const ShiftChart c = shift_chart(m, lambda);
  require_lambda_side(c);
  const LabelContext ctx = label_context(m, c);
  const IntrinsicItinerary it = intrinsic_itinerary(m, c, ctx);
  EValue e;
  e.word = it.word;
  e.level = c.lambda_level;
  e.value = apply_branches(m, it.word, koenigs_inverse(m.lin, it.zeta));
  return e;
}

// ---------------------------------------------------------------------------
// Inverse of E by Newton in deep coordinates: with the target's chart word of
// length n fixed, solve phi_lambda(f_lambda^n(lambda)) = phi_0(Q^n(target)).
// Near prepoles f^{n-1}(lambda) lies far out in the tract of mu; there the
// coordinate log(phi - r0) is used with f(w) - mu written as exp(L).

inline DeepCoordinate deep_target(const ModelMap& m, cplx z) {
  const FatouCoordinate c = coordinate_chart(m, z);
  DeepCoordinate t;
  t.steps = c.n();
  t.zeta = std::polar(c.r * std::pow(std::abs(m.lin.multiplier), c.n()), c.t());
  return t;
}

inline cplx wrap_log(cplx l) {
  double im = std::remainder(l.imag(), 2.0 * kPi);
  return cplx{l.real(), im};
}

inline cplx expm1c(cplx z) {
  const double sy = std::sin(0.5 * z.imag());
  return cplx{std::expm1(z.real()) * std::cos(z.imag()) - 2.0 * sy * sy, std::exp(z.real()) * std::sin(z.imag())};
}

// log(phi_lambda(mu + eps) - phi_lambda(mu)) from log eps, without
// cancellation: the offset orbit delta_k = f^k(mu + eps) - f^k(mu) is carried
// through exact Mobius differences.
inline cplx log_phi_offset(const ShiftChart& c, cplx log_eps) {
  const FamilySlice& s = c.slice;
  const Linearizer& lin = c.lin;
  if (log_eps.real() < -600.0) return std::log(koenigs_full(lin, s.mu).derivative) + log_eps;
  const cplx eps = std::exp(log_eps);
  cplx x = s.mu, d = eps;
  const cplx det = 1.0 / s.lambda - 1.0 / s.mu;
  int n = 0;
  while (std::abs(x) >= lin.trap_radius || std::abs(x + d) >= lin.trap_radius) {
    if (n >= kMaxBasinSteps) throw Error(Errc::NotInBasin, "offset orbit does not reach the fixed point");
    const auto p = detail::mobius_parts(s, x);
    const cplx e = expm1c((x.real() >= 0.0 ? -2.0 : 2.0) * d);
    // weight' = weight * (1 + e) for both exponent forms
    cplx nd;
    if (x.real() >= 0.0) {
      const cplx v = p.weight, dv = v * e;
      const cplx den2 = 1.0 / s.lambda - (v + dv) / s.mu;
      nd = -det * dv / (p.den * den2);
    } else {
      const cplx u = p.weight, du = u * e;
      const cplx den2 = (u + du) / s.lambda - 1.0 / s.mu;
      nd = det * du / (p.den * den2);
    }
    x = evalf(s, x);
    d = nd;
    ++n;
  }
  // divided Horner difference of the Schroder series
  const cplx h = x - lin.fixed_point, h2 = h + d;
  cplx diff{}, t{};
  for (int k = kSeriesDegree; k >= 0; --k) {
    diff = diff * h2 + t * d;
    t = t * h + lin.coeffs[k];
  }
  // log eps is kept as given so that its imaginary part stays unwrapped
  return log_eps + std::log(lin.scale * diff / eps) - static_cast<double>(n) * std::log(lin.multiplier);
}

// Residual of the deep equation at lambda. Tract residuals are taken modulo
// 2 pi i unless `lift` fixes the sheet: deep in the tract the points lambda
// with f(lambda) = w + k pi i crowd together and only the unwrapped
// logarithm tells them apart.
inline cplx deep_residual(const ModelMap& m, cplx lambda, const DeepCoordinate& t,
                          std::optional<int> lift = std::nullopt) {
  const ShiftChart c = shift_chart(m, lambda);
  const FamilySlice& s = c.slice;
  const int n = t.steps;
  cplx w = lambda;
  for (int k = 1; k <= n; ++k) {
    if (k == n && t.tract && w.real() < 0.0 && distance_to_poles(s, w) > 1e-3) {
      // f(w) - mu = mu (mu/lambda - 1) u / (1 - u mu/lambda), u = e^{2w}
      const cplx u = std::exp(2.0 * w);
      const cplx log_eps = std::log(s.mu * (s.mu / s.lambda - 1.0)) + 2.0 * w - std::log(1.0 - u * s.mu / s.lambda);
      const cplx r = log_phi_offset(c, log_eps) - t.log_eta;
      return lift ? r - kI * (2.0 * kPi * *lift) : wrap_log(r);
    }
    const Point p = eval(s, w);
    if (p.infinite) throw Error(Errc::InfinityFlag, "orbit of lambda reaches a pole");
    w = p.z;
  }
  const cplx zeta = koenigs(c.lin, w);
  if (t.tract) {
    if (lift) throw Error(Errc::LeftShiftLocus, "orbit left the tract of mu");
    return wrap_log(std::log(zeta - m.r0) - t.log_eta);
  }
  return zeta - t.zeta;
}

// Sheet index of a tract residual at a solution lambda.
inline std::optional<int> tract_lift(const ModelMap& m, cplx lambda, const DeepCoordinate& t) {
  if (!t.tract) return std::nullopt;
  const cplx r = deep_residual(m, lambda, t, 0);
  return static_cast<int>(std::lround(r.imag() / (2.0 * kPi)));
}

struct InverseResult {
  cplx lambda;
  double residual;
  int iterations;
};

// Newton with a central-difference derivative. Converged at residual <= tol;
// when roundoff stalls the iteration first, a residual <= loose_tol is
// accepted (this happens next to the boundary of the shift locus).
inline InverseResult E_inverse_deep(const ModelMap& m, const DeepCoordinate& t, cplx seed, double tol = 1e-11,
                                    int max_iter = 40, std::optional<int> lift = std::nullopt,
                                    double loose_tol = 1e-8) {
  // tract residuals are relative to the size of log(zeta - r0)
  const double scale = t.tract ? std::max(1.0, std::abs(t.log_eta)) : std::max(1.0, std::abs(t.zeta));
  auto residual = [&](cplx l) {
    try {
      return deep_residual(m, l, t, lift);
    } catch (const Error&) {
      throw Error(Errc::LeftShiftLocus, "iterate left the region where the chart is defined");
    }
  };
  cplx l = seed;
  double last_step = 1e-4;
  std::optional<InverseResult> best;
  int polish = 0, stale = 0;
  for (int it = 0; it < max_iter; ++it) {
    const cplx F = residual(l);
    const double res = std::abs(F) / scale;
    if (!best || res < best->residual) {
      best = InverseResult{l, res, it};
      stale = 0;
    } else if (++stale >= 3) {
      break;
    }
    if (best->residual <= tol && (++polish > 2 || res == 0.0)) break;
    const double h = std::clamp(1e-4 * last_step, 1e-12, 1e-7) * std::max(1.0, std::abs(l));
    const cplx dF = (residual(l + h) - residual(l - h)) / (2.0 * h);
    if (dF == cplx{} || !is_finite(dF)) break;
    cplx step = F / dF;
    if (best->residual > tol) {
      const double cap = 0.25 * std::max(1e-12, std::abs(l - seed) + last_step * 4.0);
      if (std::abs(step) > cap) step *= cap / std::abs(step);
    }
    l -= step;
    last_step = std::max(std::abs(step), 1e-14);
  }
  if (best && best->residual <= std::max(tol, loose_tol) && (best->residual <= tol || stale >= 3)) return *best;
  throw Error(Errc::NoConvergence, "E inverse Newton did not converge");
}

inline cplx E_inverse(const ModelMap& m, cplx target, cplx seed_lambda) {
  if (model_level(m, target) <= m.r0) throw Error(Errc::NotInK0, "target must have level above r0");
  const DeepCoordinate t = deep_target(m, target);
  const InverseResult r = E_inverse_deep(m, t, seed_lambda);
  const ParameterClass pc = classify_parameter(m.rho(), r.lambda);
  if (pc.region != Region::Shift) throw Error(Errc::LeftShiftLocus, "solution is not in the shift locus");
  return r.lambda;
}

}  // namespace atlas
