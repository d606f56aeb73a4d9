#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>

#include "family.hpp"
#include "itinerary.hpp"
#include "orbit.hpp"

namespace atlas {

enum class BoundaryKind { VirtualCenter, Parabolic, MisiurewiczLike };

inline const char* boundary_kind_name(BoundaryKind k) {
  switch (k) {
    case BoundaryKind::VirtualCenter: return "virtual_center";
    case BoundaryKind::Parabolic: return "parabolic";
    case BoundaryKind::MisiurewiczLike: return "misiurewicz";
  }
  return "unknown";
}

struct SolveResult {
  BoundaryKind kind = BoundaryKind::VirtualCenter;
  cplx rho;
  std::string word;
  cplx lambda;
  double residual = 0.0;
  std::optional<cplx> cycle_point;
  std::optional<cplx> multiplier;
  int pole_index = 0;           // virtual centers: index of the pole hit
  int steps_to_infinity = -1;   // virtual centers: first k with f^k(lambda) = infinity
  int iterations = 0;
};

namespace detail {

inline cplx iterate_n(const FamilySlice& s, cplx z, int n) {
  for (int k = 0; k < n; ++k) z = evalf(s, z);
  return z;
}

// Solves the 2x2 complex system G(x) = 0 by Newton with a central-difference
// Jacobian and step damping.
template <class G>
inline std::optional<std::array<cplx, 2>> newton2(G&& g, std::array<cplx, 2> x, double tol, int max_iter,
                                                  int& iterations, double& residual) {
  for (int it = 0; it < max_iter; ++it) {
    iterations = it;
    std::array<cplx, 2> v;
    try {
      v = g(x);
    } catch (const Error&) {
      return std::nullopt;
    }
    residual = std::max(std::abs(v[0]), std::abs(v[1]));
    if (!std::isfinite(residual)) return std::nullopt;
    if (residual <= tol) {
      // one polishing step, kept only if it helps
      std::array<cplx, 2> xp = x;
      try {
        cplx J[2][2];
        for (int c = 0; c < 2; ++c) {
          const double h = 1e-7 * std::max(1.0, std::abs(x[c]));
          auto xa = x, xb = x;
          xa[c] += h;
          xb[c] -= h;
          const auto ga = g(xa), gb = g(xb);
          J[0][c] = (ga[0] - gb[0]) / (2.0 * h);
          J[1][c] = (ga[1] - gb[1]) / (2.0 * h);
        }
        const cplx det = J[0][0] * J[1][1] - J[0][1] * J[1][0];
        xp[0] -= (J[1][1] * v[0] - J[0][1] * v[1]) / det;
        xp[1] -= (J[0][0] * v[1] - J[1][0] * v[0]) / det;
        const auto vp = g(xp);
        const double rp = std::max(std::abs(vp[0]), std::abs(vp[1]));
        if (rp < residual) {
          residual = rp;
          return xp;
        }
      } catch (const Error&) {
      }
      return x;
    }
    cplx J[2][2];
    try {
      for (int c = 0; c < 2; ++c) {
        const double h = 1e-7 * std::max(1.0, std::abs(x[c]));
        auto xa = x, xb = x;
        xa[c] += h;
        xb[c] -= h;
        const auto ga = g(xa), gb = g(xb);
        J[0][c] = (ga[0] - gb[0]) / (2.0 * h);
        J[1][c] = (ga[1] - gb[1]) / (2.0 * h);
      }
    } catch (const Error&) {
      return std::nullopt;
    }
    const cplx det = J[0][0] * J[1][1] - J[0][1] * J[1][0];
    if (det == cplx{} || !is_finite(det)) return std::nullopt;
    cplx d0 = (J[1][1] * v[0] - J[0][1] * v[1]) / det;
    cplx d1 = (J[0][0] * v[1] - J[1][0] * v[0]) / det;
    const double len = std::max(std::abs(d0), std::abs(d1));
    const double cap = 0.1 * std::max(1.0, std::abs(x[0]));
    if (len > cap) {
      d0 *= cap / len;
      d1 *= cap / len;
    }
    x[0] -= d0;
    x[1] -= d1;
  }
  return std::nullopt;
}

}  // namespace detail

// First k >= 1 with f^k(z) = infinity, or -1 within max_steps.
inline int steps_to_infinity(const FamilySlice& s, cplx z, int max_steps) {
  Point w{z};
  for (int k = 1; k <= max_steps; ++k) {
    w = eval(s, w);
    if (w.infinite) return k;
  }
  return -1;
}

// Parameter lambda* whose orbit reaches a pole: f^{p-2}(lambda) = pole_j(lambda)
// with p - 1 the length of the word. The pole index j is read off the seed.
inline SolveResult virtual_center_solve(cplx rho, const Itinerary& word, cplx seed) {
  if (!word.is_finite_word() || word.preperiod.empty())
    throw Error(Errc::InadmissibleWord, "virtual centers need a nonempty finite word");
  const int p = static_cast<int>(word.preperiod.size()) + 1;
  const FamilySlice s0 = make_slice(rho, seed);
  const cplx y0 = detail::iterate_n(s0, seed, p - 2);
  const int j = static_cast<int>(std::lround((y0.imag() - pole(s0, 0).imag()) / kPi));

  auto F = [&](cplx l) {
    const FamilySlice s = make_slice(rho, l);
    return detail::iterate_n(s, l, p - 2) - pole(s, j);
  };
  cplx l = seed;
  double res = INFINITY;
  int it = 0;
  for (; it < 60; ++it) {
    const cplx v = F(l);
    res = std::abs(v);
    if (res <= 1e-13 * std::max(1.0, std::abs(l))) break;
    const double h = 1e-7 * std::max(1.0, std::abs(l));
    const cplx d = (F(l + h) - F(l - h)) / (2.0 * h);
    if (d == cplx{} || !is_finite(d)) throw Error(Errc::NoConvergence, "flat virtual center residual");
    cplx step = v / d;
    const double cap = 0.1 * std::max(1.0, std::abs(l));
    if (std::abs(step) > cap) step *= cap / std::abs(step);
    l -= step;
    if (!is_finite(l)) throw Error(Errc::NoConvergence, "virtual center Newton diverged");
  }
  if (!(res <= 1e-10)) throw Error(Errc::NoConvergence, "virtual center Newton did not converge");
  const FamilySlice s = make_slice(rho, l);
  SolveResult r;
  r.kind = BoundaryKind::VirtualCenter;
  r.rho = rho;
  r.word = word.to_string();
  r.lambda = l;
  r.residual = res;
  r.pole_index = j;
  r.steps_to_infinity = steps_to_infinity(s, l, p + 2);
  r.iterations = it;
  if (r.steps_to_infinity != p - 1) throw Error(Errc::NoConvergence, "orbit does not reach infinity at step p-1");
  return r;
}

// Orbit point of the seed parameter closest to a parabolic n-cycle.
inline cplx parabolic_cycle_seed(const FamilySlice& s, cplx seed_lambda, int n) {
  cplx w = seed_lambda, best_z = seed_lambda;
  double best = INFINITY;
  for (int k = 0; k < 400; ++k) {
    try {
      w = evalf(s, w);
      // the attracting fixed point 0 also has a small |f^n(w) - w|; the multiplier term rules it out
      const auto [fw, dw] = iterate_with_derivative(s, w, n);
      const double d = std::abs(fw - w) + std::abs(dw - 1.0);
      if (d < best) {
        best = d;
        best_z = w;
      }
    } catch (const Error&) {
      break;
    }
  }
  return best_z;
}

inline cplx misiurewicz_cycle_seed(const FamilySlice& s, cplx seed_lambda, int k) {
  return detail::iterate_n(s, seed_lambda, k);
}

// Parabolic parameter: f^n(z) = z and (f^n)'(z) = 1.
inline SolveResult parabolic_solve(cplx rho, int n, cplx seed_lambda, cplx seed_z) {
  if (n < 1) throw Error(Errc::InadmissibleWord, "period must be positive");
  auto G = [&](const std::array<cplx, 2>& x) {
    const FamilySlice s = make_slice(rho, x[0]);
    const auto [w, d] = iterate_with_derivative(s, x[1], n);
    return std::array<cplx, 2>{w - x[1], d - 1.0};
  };
  int its = 0;
  double res = INFINITY;
  const auto x = detail::newton2(G, {seed_lambda, seed_z}, 1e-12, 80, its, res);
  if (!x || !(res <= 1e-9)) throw Error(Errc::NoConvergence, "parabolic Newton did not converge");
  const FamilySlice s = make_slice(rho, (*x)[0]);
  const auto [w, mult] = iterate_with_derivative(s, (*x)[1], n);
  (void)w;
  if (std::abs(mult) < 1.0 - 1e-8) throw Error(Errc::CollapsedToAttracting, "landed on an attracting cycle");
  if (std::abs(mult - 1.0) > 1e-8) throw Error(Errc::NoConvergence, "multiplier is not 1");
  if (std::abs((*x)[1] - (*x)[0]) <= 1e-6) throw Error(Errc::NoConvergence, "cycle point is the asymptotic value");
  SolveResult r;
  r.kind = BoundaryKind::Parabolic;
  r.rho = rho;
  r.word = "|" + std::to_string(n);
  r.lambda = (*x)[0];
  r.cycle_point = (*x)[1];
  r.multiplier = mult;
  r.residual = res;
  r.iterations = its;
  return r;
}

// Misiurewicz-like parameter: f^k(lambda) = z with z on a repelling n-cycle.
inline SolveResult misiurewicz_solve(cplx rho, int k, int n, cplx seed_lambda, cplx seed_z) {
  if (k < 1 || n < 1) throw Error(Errc::InadmissibleWord, "k and n must be positive");
  auto G = [&](const std::array<cplx, 2>& x) {
    const FamilySlice s = make_slice(rho, x[0]);
    return std::array<cplx, 2>{detail::iterate_n(s, x[0], k) - x[1], detail::iterate_n(s, x[1], n) - x[1]};
  };
  int its = 0;
  double res = INFINITY;
  const auto x = detail::newton2(G, {seed_lambda, seed_z}, 1e-12, 80, its, res);
  if (!x || !(res <= 1e-9)) throw Error(Errc::NoConvergence, "Misiurewicz Newton did not converge");
  const FamilySlice s = make_slice(rho, (*x)[0]);
  const auto [w, mult] = iterate_with_derivative(s, (*x)[1], n);
  (void)w;
  if (!(std::abs(mult) > 1.0)) throw Error(Errc::NotRepelling, "landing cycle is not repelling");
  SolveResult r;
  r.kind = BoundaryKind::MisiurewiczLike;
  r.rho = rho;
  r.lambda = (*x)[0];
  r.cycle_point = (*x)[1];
  r.multiplier = mult;
  r.residual = res;
  r.iterations = its;
  return r;
}

}  // namespace atlas
