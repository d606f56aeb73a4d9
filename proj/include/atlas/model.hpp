#pragma once

#include <cmath>
#include <initializer_list>
#include <optional>
#include <vector>

#include "family.hpp"
#include "itinerary.hpp"
#include "linearizer.hpp"
#include "orbit.hpp"

namespace atlas {

struct ModelMap {
  FamilySlice slice;
  cplx q0;
  Linearizer lin;
  double r0 = 0.0;
  cplx root;          // tree root on gamma_0, level r0/rho, angle pi
  int cross_up = +1;  // level arcs leave A_{j0} toward A_{(j+1)0} at angle 2pi (+1) or 0 (-1)
  int pole_side = +1; // gamma_0 reaches the principal pole as its angle tends to 0+ (+1) or 2pi- (-1)

  cplx rho() const { return slice.rho; }
  cplx lambda0() const { return slice.lambda; }
};

namespace detail {

// lambda(q) for which q is a fixed point of f_lambda.
inline cplx lambda_of_fixed_point(cplx rho, cplx q) {
  return 1.0 / (1.0 / q - std::exp(-q) / (rho * std::sinh(q)));
}

inline cplx fixed_point_multiplier(cplx rho, cplx q) {
  const FamilySlice s = make_slice(rho, lambda_of_fixed_point(rho, q));
  return deriv(s, q);
}

inline cplx apply_word(const FamilySlice& s, const std::vector<int>& word, Point w) {
  for (auto it = word.rbegin(); it != word.rend(); ++it) w = Point{inverse_branch(s, *it, w)};
  if (w.infinite) throw Error(Errc::InadmissibleWord, "empty word applied to infinity");
  return w.z;
}

}  // namespace detail

inline cplx apply_branches(const ModelMap& m, const std::vector<int>& word, cplx w) {
  return detail::apply_word(m.slice, word, Point{w});
}

// Point R_j(R_0(psi0(zeta))) of the fundamental domain A_{j0}, rho r0 <= |zeta| <= r0.
inline cplx annulus_point(const ModelMap& m, int j, cplx zeta) {
  const cplx y = koenigs_inverse_continued(m.lin, zeta);
  return inverse_branch(m.slice, j, inverse_branch(m.slice, 0, y));
}

inline ModelMap model_setup(cplx rho0) {
  if (!(std::abs(rho0) > 0.0 && std::abs(rho0) < 1.0)) throw Error(Errc::BadMultiplier, "|rho0| must lie in (0,1)");
  if (rho0.imag() != 0.0 || rho0.real() <= 0.0)
    throw Error(Errc::NoSolutionInWindow, "model construction is implemented for real rho0 in (0,1)");
  const double rho = rho0.real();
  auto g = [&](double q) -> std::optional<double> {
    const cplx l = detail::lambda_of_fixed_point(rho0, q);
    if (!is_finite(l) || l.real() <= 0.0 || std::abs(l - rho0 / 2.0) < 1e-9) return std::nullopt;
    return detail::fixed_point_multiplier(rho0, q).real() - rho;
  };
  const double dq = 0.005;
  for (double a = 0.05; a < 20.0; a += dq) {
    const auto ga = g(a), gb = g(a + dq);
    if (!ga || !gb || (*ga > 0) == (*gb > 0)) continue;
    double lo = a, hi = a + dq, glo = *ga;
    bool ok = true;
    for (int it = 0; it < 200 && hi - lo > 1e-16 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      const auto gm = g(mid);
      if (!gm) { ok = false; break; }
      if ((*gm > 0) == (glo > 0)) { lo = mid; glo = *gm; } else { hi = mid; }
    }
    if (!ok) continue;
    const double q = 0.5 * (lo + hi);
    const cplx l = detail::lambda_of_fixed_point(rho0, q);
    FamilySlice s;
    try {
      s = make_slice(rho0, cplx{l.real(), 0.0});
    } catch (const Error&) {
      continue;
    }
    const OrbitVerdict vl = classify_orbit(s, s.lambda, 4000, 1e-6);
    const OrbitVerdict vm = classify_orbit(s, s.mu, 4000, 1e-6, s.mu);
    if (vl.kind != OrbitKind::AttractedToCycle || vl.period != 1 || std::abs(vl.representative - q) > 1e-6) continue;
    if (vm.kind != OrbitKind::AttractedToOrigin) continue;

    ModelMap m;
    m.slice = s;
    m.lin = build_linearizer(s, cplx{q, 0.0}, Normalization::DerivativeOne, std::nullopt, s.lambda);
    m.q0 = m.lin.fixed_point;
    m.r0 = m.lin.r0;
    m.root = inverse_branch(s, 0, koenigs_inverse_continued(m.lin, cplx{-m.r0, 0.0}));

    // Orientation of the slit along l in annulus coordinates.
    const double rm = m.r0 * std::sqrt(std::abs(m.lin.multiplier));
    const double eps = 1e-4;
    const cplx below = annulus_point(m, 0, std::polar(rm, 2.0 * kPi - eps));
    const cplx up = annulus_point(m, 1, std::polar(rm, eps));
    const cplx down = annulus_point(m, -1, std::polar(rm, eps));
    m.cross_up = std::abs(below - up) < std::abs(below - down) ? +1 : -1;

    const double te = 1e-5;
    const cplx near0 = annulus_point(m, 0, std::polar(m.r0, te));
    const cplx near2 = annulus_point(m, 0, std::polar(m.r0, 2.0 * kPi - te));
    const cplx p0 = pole(m.slice, 0);
    m.pole_side = std::abs(near0 - p0) < std::abs(near2 - p0) ? +1 : -1;
    return m;
  }
  throw Error(Errc::NoSolutionInWindow, "no attracting fixed point with the requested multiplier");
}

// ---------------------------------------------------------------------------
// Resolvers for points named by itineraries.

inline cplx prepole_point(const ModelMap& m, const Itinerary& word) {
  if (!word.is_finite_word() || word.preperiod.empty()) throw Error(Errc::InadmissibleWord, "prepole needs a finite word");
  const std::vector<int> head(word.preperiod.begin(), word.preperiod.end() - 1);
  return apply_branches(m, head, pole(m.slice, word.preperiod.back()));
}

inline cplx periodic_point(const ModelMap& m, const std::vector<int>& per) {
  if (per.empty()) throw Error(Errc::InadmissibleWord, "empty period");
  cplx z = pole(m.slice, per.front());
  double last = INFINITY;
  for (int it = 0; it < 20000; ++it) {
    const cplx zn = apply_branches(m, per, z);
    const double step = std::abs(zn - z);
    z = zn;
    if (step < 1e-13 * std::max(1.0, std::abs(z))) break;
    if (it > 200 && step >= last) break;
    last = step;
  }
  const int n = static_cast<int>(per.size());
  const auto [zr, mult] = refine_cycle(m.slice, z, n);
  if (std::abs(zr - z) > 1e-6) throw Error(Errc::NoConvergence, "periodic point refinement drifted");
  if (std::abs(mult) <= 1.0) throw Error(Errc::NoConvergence, "cycle is not repelling");
  return zr;
}

inline cplx periodic_point(const ModelMap& m, const Itinerary& word) {
  if (!word.is_periodic()) throw Error(Errc::InadmissibleWord, "periodic point needs a purely periodic word");
  return periodic_point(m, word.period);
}

inline cplx preperiodic_point(const ModelMap& m, const Itinerary& word) {
  if (word.period.empty()) throw Error(Errc::InadmissibleWord, "preperiodic point needs a period");
  return apply_branches(m, word.preperiod, periodic_point(m, word.period));
}

inline cplx fixed_point_preimage(const ModelMap& m, const Itinerary& word) {
  if (!word.is_finite_word()) throw Error(Errc::InadmissibleWord, "fixed point preimage needs a finite word");
  return apply_branches(m, word.preperiod, m.q0);
}

// ---------------------------------------------------------------------------
// Fundamental-domain coordinates.

struct FatouCoordinate {
  std::vector<int> word;  // domain label; ends in 0 for A-type
  double r = 0.0;         // level
  double theta = 0.0;     // t + pi (n-1), t in [-pi, pi)

  int n() const { return static_cast<int>(word.size()); }
  double t() const { return theta - kPi * (n() - 1); }
  bool is_a_type() const { return word.empty() || word.back() == 0; }
};

// Shell index k of a B-type coordinate: Q^n(z) lies in the annulus of levels
// (|rho|^{k+1} r0, |rho|^k r0].
inline int shell_index(const ModelMap& m, const FatouCoordinate& c) {
  const double ar = std::abs(m.lin.multiplier);
  const double rn = c.r * std::pow(ar, c.n());
  return static_cast<int>(std::floor(std::log(m.r0 / rn) / std::log(1.0 / ar)));
}

inline double model_level(const ModelMap& m, cplx z) { return std::abs(koenigs(m.lin, z)); }

inline FatouCoordinate coordinate_chart(const ModelMap& m, cplx z) {
  try {
    (void)koenigs(m.lin, z);
  } catch (const Error&) {
    throw Error(Errc::NotInK0, "point is not attracted to q0");
  }
  if (std::abs(z - m.slice.lambda) < 1e-14) throw Error(Errc::NotInK0, "chart undefined at lambda0");
  FatouCoordinate c;
  cplx w = z;
  for (int k = 0; k < 400 && !in_injectivity_domain(m.lin, w); ++k) {
    c.word.push_back(branch_index(m.slice, w));
    w = evalf(m.slice, w);
  }
  if (!in_injectivity_domain(m.lin, w)) throw Error(Errc::NotInK0, "orbit never enters Delta");
  const cplx phi = koenigs(m.lin, w);
  const int n = c.n();
  c.r = std::abs(phi) / std::pow(std::abs(m.lin.multiplier), n);
  c.theta = wrap_angle(std::arg(phi)) + kPi * (n - 1);
  return c;
}

inline cplx point_from_coordinate(const ModelMap& m, const FatouCoordinate& c) {
  const int n = c.n();
  const double ar = std::abs(m.lin.multiplier);
  const double rn = c.r * std::pow(ar, n);
  if (!(c.r >= 0.0) || rn >= m.r0) throw Error(Errc::InadmissibleWord, "level does not reach Delta after n steps");
  if (n > 0 && c.word.back() == 0 && rn / ar <= m.r0)
    throw Error(Errc::InadmissibleWord, "A-type word enters Delta earlier");
  const cplx zeta = std::polar(rn, c.t());
  return apply_branches(m, c.word, koenigs_inverse(m.lin, zeta));
}

// ---------------------------------------------------------------------------
// Deep coordinates: z is described by (n, zeta) with phi_0(Q^n z) = zeta.
// Close to a prepole zeta approaches r0 faster than doubles resolve, so the
// tail of a final branch stores log(zeta - r0) instead.

struct DeepCoordinate {
  int steps = 0;
  cplx zeta{};
  bool tract = false;
  cplx log_eta{};  // log(zeta - r0) when tract

  double level(double abs_rho) const {
    return std::abs(zeta) / std::pow(abs_rho, steps);
  }
};

// Same point written with `steps` >= c.steps.
inline DeepCoordinate deepen(const ModelMap& m, DeepCoordinate c, int steps) {
  if (steps < c.steps || c.tract) throw Error(Errc::InadmissibleWord, "cannot deepen this coordinate");
  c.zeta *= std::pow(m.lin.multiplier, steps - c.steps);
  c.steps = steps;
  return c;
}

inline cplx tract_log_eta(const ModelMap& m, DeepCoordinate c) {
  return c.tract ? c.log_eta : std::log(c.zeta - m.r0);
}

// Interpolation between two nearby deep coordinates, u in [0,1].
inline DeepCoordinate interpolate(const ModelMap& m, DeepCoordinate a, DeepCoordinate b, double u) {
  const int n = std::max(a.steps, b.steps);
  if (a.tract || b.tract) {
    if (a.steps != b.steps) throw Error(Errc::InadmissibleWord, "tract coordinates with different depths");
    DeepCoordinate c;
    c.steps = n;
    c.tract = true;
    const cplx la = tract_log_eta(m, a), lb = tract_log_eta(m, b);
    cplx d = lb - la;
    d = cplx{d.real(), std::remainder(d.imag(), 2.0 * kPi)};
    c.log_eta = la + u * d;
    c.zeta = m.r0 + std::exp(c.log_eta);
    return c;
  }
  a = deepen(m, a, n);
  b = deepen(m, b, n);
  const double ra = std::log(std::abs(a.zeta)), rb = std::log(std::abs(b.zeta));
  const double ta = std::arg(a.zeta);
  const double dt = std::remainder(std::arg(b.zeta) - ta, 2.0 * kPi);
  DeepCoordinate c;
  c.steps = n;
  c.zeta = std::polar(std::exp(ra + u * (rb - ra)), ta + u * dt);
  return c;
}

// Model point of a tract coordinate: R_0(lambda0 + eps) with
// eps = eta / phi_0'(lambda0), evaluated in logarithms.
inline cplx tract_point_r0(const ModelMap& m, cplx log_eta) {
  const KoenigsValue kv = koenigs_full(m.lin, m.lambda0());
  const cplx log_eps = log_eta - std::log(kv.derivative);
  const cplx l0 = m.lambda0(), mu0 = m.slice.mu;
  const cplx a = l0 / mu0 - 1.0 + std::exp(log_eps) / mu0;
  const cplx lb = log_eps - std::log(l0);
  const double im = std::remainder(std::arg(a) - lb.imag(), 2.0 * kPi);
  return 0.5 * cplx{std::log(std::abs(a)) - lb.real(), im};
}

// ---------------------------------------------------------------------------
// Tree paths. Branches are concatenations of gradient and level arcs written
// in annulus coordinates of the domains A_{j0}.

struct TreePath {
  Itinerary target;
  std::vector<double> t;
  std::vector<cplx> z;
  std::vector<DeepCoordinate> deep;
  std::vector<std::vector<int>> words;  // fundamental-domain word of each sample
  std::vector<std::size_t> node_indices;
  std::vector<int> prefix;  // symbols leading to the final branch or terminal node
};

namespace detail {

struct AnnulusSample {
  int domain;
  cplx zeta;
};

inline void sample_arc(std::vector<AnnulusSample>& out, int domain, bool level, double r_a, double r_b, double a0,
                       double a1, int n) {
  for (int i = 0; i < n; ++i) {
    const double u = static_cast<double>(i) / n;
    const double r = level ? r_a : std::exp(std::log(r_a) + u * (std::log(r_b) - std::log(r_a)));
    const double a = level ? a0 + u * (a1 - a0) : a0;
    out.push_back({domain, std::polar(r, a)});
  }
}

// Branch s_k from the root to x*_{k0}, in annulus coordinates; the end point
// itself is the first sample of the next branch.
inline std::vector<AnnulusSample> s_branch(const ModelMap& m, int k, int samples) {
  const double ar = std::abs(m.lin.multiplier);
  const double rin = ar * m.r0, rout = m.r0;
  std::vector<AnnulusSample> out;
  if (k == 0) {
    sample_arc(out, 0, false, rin, rout, kPi, kPi, samples);
    return out;
  }
  const double rmid = std::sqrt(rin * rout);
  const int dir = k > 0 ? +1 : -1;
  // Leaving toward j+dir happens at angle 2pi when dir == cross_up, else at 0.
  const double exit_a = (dir == m.cross_up) ? 2.0 * kPi : 0.0;
  const double entry_a = 2.0 * kPi - exit_a;
  sample_arc(out, 0, false, rin, rmid, kPi, kPi, samples / 2);
  sample_arc(out, 0, true, rmid, rmid, kPi, exit_a, samples / 2);
  for (int j = dir; j != k; j += dir) sample_arc(out, j, true, rmid, rmid, entry_a, exit_a, samples);
  sample_arc(out, k, true, rmid, rmid, entry_a, kPi, samples / 2);
  sample_arc(out, k, false, rmid, rout, kPi, kPi, samples / 2);
  return out;
}

}  // namespace detail

inline constexpr double kTractSwitch = 1e-6;

// depth: number of interior branches s for infinite targets (ignored for finite).
// tail_depth: -log of the last angle on the final branch of a finite target.
inline TreePath tree_path(const ModelMap& m, const Itinerary& target, int samples_per_branch, int depth = 0,
                          double tail_depth = 1e7) {
  if (target.is_infinity_terminal) throw Error(Errc::InadmissibleWord, "tree path to infinity is the branch r_0");
  if (samples_per_branch < 4) throw Error(Errc::InadmissibleWord, "too few samples per branch");
  std::vector<int> word;
  const bool finite = target.is_finite_word();
  if (finite) {
    if (target.preperiod.empty()) throw Error(Errc::InadmissibleWord, "empty word");
    word = target.preperiod;
  } else {
    if (depth <= 0) depth = static_cast<int>(target.preperiod.size() + target.period.size()) + 6;
    for (int k = 0; k < depth; ++k) word.push_back(target.symbol(k));
  }

  TreePath out;
  out.target = target;
  const double nb = static_cast<double>(word.size() + (finite ? 1 : 0));
  std::vector<int> prefix;
  auto push = [&](double tt, cplx z, const DeepCoordinate& d, std::vector<int> w) {
    if (tt >= 1.0) tt = std::nextafter(1.0, 0.0);
    out.t.push_back(tt);
    out.z.push_back(z);
    out.deep.push_back(d);
    out.words.push_back(std::move(w));
  };
  auto extended = [&](std::initializer_list<int> tail) {
    std::vector<int> w = prefix;
    w.insert(w.end(), tail);
    return w;
  };
  for (std::size_t b = 0; b < word.size(); ++b) {
    out.node_indices.push_back(out.z.size());
    const auto br = detail::s_branch(m, word[b], samples_per_branch);
    for (std::size_t i = 0; i < br.size(); ++i) {
      const cplx z = apply_branches(m, prefix, annulus_point(m, br[i].domain, br[i].zeta));
      DeepCoordinate d;
      d.steps = static_cast<int>(prefix.size()) + 2;
      d.zeta = br[i].zeta;
      push((static_cast<double>(b) + static_cast<double>(i) / br.size()) / nb, z, d, extended({br[i].domain, 0}));
    }
    prefix.push_back(word[b]);
  }
  out.prefix = prefix;
  out.node_indices.push_back(out.z.size());
  if (!finite) {
    DeepCoordinate d;
    d.steps = static_cast<int>(prefix.size()) + 2;
    d.zeta = cplx{-std::abs(m.lin.multiplier) * m.r0, 0.0};
    push(1.0, apply_branches(m, prefix, m.root), d, extended({0, 0}));
    return out;
  }

  // Final branch: angle t from pi down to kTractSwitch geometrically, then
  // -log t from -log kTractSwitch up to tail_depth geometrically.
  const int n1 = samples_per_branch / 2, n2 = samples_per_branch - n1;
  const double sgn = m.pole_side > 0 ? 1.0 : -1.0;
  const int steps = static_cast<int>(prefix.size()) + 1;
  for (int i = 0; i < n1; ++i) {
    const double u = static_cast<double>(i) / n1;
    const double tt = kPi * std::pow(kTractSwitch / kPi, u);
    DeepCoordinate d;
    d.steps = steps;
    d.zeta = std::polar(m.r0, sgn * tt);
    const cplx z = apply_branches(m, prefix, inverse_branch(m.slice, 0, koenigs_inverse_continued(m.lin, d.zeta)));
    push((static_cast<double>(word.size()) + 0.5 * u) / nb, z, d, extended({0}));
  }
  const double s0 = -std::log(kTractSwitch);
  for (int i = 0; i < n2; ++i) {
    const double u = static_cast<double>(i) / (n2 - 1);
    const double sv = s0 * std::pow(tail_depth / s0, u);
    const double tt = std::exp(-sv);
    DeepCoordinate d;
    d.steps = steps;
    d.tract = true;
    // r0 (e^{i sgn t} - 1) = 2 r0 sin(t/2) e^{i sgn (t + pi)/2}
    d.log_eta = cplx{std::log(2.0 * m.r0) + (sv > 30.0 ? -sv - std::log(2.0) : std::log(std::sin(0.5 * tt))),
                     sgn * 0.5 * (tt + kPi)};
    d.zeta = m.r0 + std::exp(d.log_eta);
    const cplx z = apply_branches(m, prefix, tract_point_r0(m, d.log_eta));
    push((static_cast<double>(word.size()) + 0.5 + 0.5 * u) / nb, z, d, extended({0}));
  }
  return out;
}

}  // namespace atlas
