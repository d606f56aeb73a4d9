#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>

#include "family.hpp"

namespace atlas {

enum class OrbitKind { AttractedToOrigin, AttractedToCycle, Unresolved };

struct OrbitVerdict {
  OrbitKind kind = OrbitKind::Unresolved;
  int period = 0;
  cplx multiplier{};
  int iterations_used = 0;
  cplx representative{};
  bool pole_hit = false;  // the orbit passed through the infinity flag
};

enum class Region { Shift, MLambda, MMu, Unresolved };

inline const char* region_name(Region r) {
  switch (r) {
    case Region::Shift: return "Shift";
    case Region::MLambda: return "MLambda";
    case Region::MMu: return "MMu";
    case Region::Unresolved: return "Unresolved";
  }
  return "Unresolved";
}

struct ParameterClass {
  Region region = Region::Unresolved;
  std::optional<int> period_lambda;
  std::optional<int> period_mu;

  // Attracting period used for shell coloring (0 when none).
  int shell_period() const {
    if (region == Region::MLambda && period_lambda) return *period_lambda;
    if (region == Region::MMu && period_mu) return *period_mu;
    return 0;
  }
};

struct IterationBudget {
  int max_iter = 2000;
  double tol = 1e-6;
  double trap_scale = 0.25;  // r_trap = trap_scale (1-|rho|) min(|lambda|,|mu|,1)
};

inline double trap_radius(const FamilySlice& s, double trap_scale = 0.25) {
  return trap_scale * (1.0 - std::abs(s.rho)) *
         std::min({std::abs(s.lambda), std::abs(s.mu), 1.0});
}

// f^p(z) and (f^p)'(z); throws InfinityFlag if the orbit meets a pole.
inline std::pair<cplx, cplx> iterate_with_derivative(const FamilySlice& s, cplx z, int p) {
  cplx d{1.0, 0.0};
  for (int k = 0; k < p; ++k) {
    d *= deriv(s, z);
    z = evalf(s, z);
  }
  return {z, d};
}

inline std::pair<cplx, cplx> refine_cycle(const FamilySlice& s, cplx seed, int p) {
  cplx z = seed;
  for (int it = 0; it < 60; ++it) {
    const auto [fz, d] = iterate_with_derivative(s, z, p);
    const cplx g = fz - z;
    if (std::abs(g) <= 1e-12 * std::max(1.0, std::abs(z))) {
      cplx mult{1.0, 0.0};
      cplx w = z;
      for (int k = 0; k < p; ++k) {
        mult *= deriv(s, w);
        w = evalf(s, w);
      }
      return {z, mult};
    }
    const cplx gp = d - 1.0;
    if (gp == cplx{}) break;
    cplx step = g / gp;
    const double cap = 1.0;
    if (std::abs(step) > cap) step *= cap / std::abs(step);
    z -= step;
    if (!is_finite(z)) break;
  }
  throw Error(Errc::NoConvergence, "cycle refinement did not converge");
}

namespace detail {

inline Point step_orbit(const FamilySlice& s, const Point& z, cplx infinity_successor, bool& pole_hit) {
  if (z.infinite) {
    pole_hit = true;
    return Point{infinity_successor};
  }
  return eval(s, z.z);
}

// Smallest divisor d of p for which z is already d-periodic.
inline int minimal_period(const FamilySlice& s, cplx z, int p) {
  for (int d = 1; d < p; ++d) {
    if (p % d) continue;
    try {
      const cplx w = iterate_with_derivative(s, z, d).first;
      if (std::abs(w - z) <= 1e-9 * std::max(1.0, std::abs(z))) return d;
    } catch (const Error&) {
    }
  }
  return p;
}

}  // namespace detail

// Orbit classification; the successor of the infinity flag defaults to lambda.
inline OrbitVerdict classify_orbit(const FamilySlice& s, cplx z0, int max_iter, double tol,
                                   std::optional<cplx> infinity_successor = std::nullopt,
                                   double trap_scale = 0.25) {
  OrbitVerdict v;
  const cplx succ = infinity_successor.value_or(s.lambda);
  const double rt = trap_radius(s, trap_scale);
  const double arho = std::abs(s.rho);

  auto origin_verdict = [&](int used) {
    v.kind = OrbitKind::AttractedToOrigin;
    v.period = 1;
    v.multiplier = s.rho;
    v.representative = cplx{};
    v.iterations_used = used;
    return v;
  };

  if (z0 == cplx{}) return origin_verdict(0);

  // Inside the trap the orbit must stay there and contract toward 0.
  auto trapped = [&](cplx z, int& used) {
    for (int k = 0; k < 400 && used < max_iter + 400; ++k) {
      if (std::abs(z) < 1e-9 * rt) {
        const cplx w = evalf(s, z);
        return std::abs(w) <= arho * std::abs(z) * (1.0 + 1e-3);
      }
      const Point w = eval(s, z);
      ++used;
      if (w.infinite || std::abs(w.z) >= rt || std::abs(w.z) > std::abs(z)) return false;
      z = w.z;
    }
    return false;
  };

  Point tortoise{z0};
  Point hare{z0};
  int power = 1, lam = 0;
  for (int n = 0; n < max_iter; ++n) {
    if (hare.finite() && std::abs(hare.z) < rt) {
      int used = n;
      if (trapped(hare.z, used)) return origin_verdict(used);
    }
    hare = detail::step_orbit(s, hare, succ, v.pole_hit);
    ++lam;
    if (hare.finite() && tortoise.finite() && std::abs(hare.z - tortoise.z) < tol) {
      try {
        const auto [zc, mult] = refine_cycle(s, hare.z, lam);
        if (std::abs(zc) < 1e-9 && lam == 1) return origin_verdict(n + 1);
        const int p = detail::minimal_period(s, zc, lam);
        const auto [zr, mr] = p == lam ? std::pair{zc, mult} : refine_cycle(s, zc, p);
        if (std::abs(mr) < 1.0) {
          bool origin = false;
          cplx w = zr;
          for (int k = 0; k < p; ++k) {
            if (std::abs(w) < 1e-9) origin = true;
            w = evalf(s, w);
          }
          if (origin) return origin_verdict(n + 1);
          v.kind = OrbitKind::AttractedToCycle;
          v.period = p;
          v.multiplier = mr;
          v.representative = zr;
          v.iterations_used = n + 1;
          return v;
        }
      } catch (const Error&) {
      }
    }
    if (power == lam) {
      tortoise = hare;
      power *= 2;
      lam = 0;
    }
  }
  v.kind = OrbitKind::Unresolved;
  v.iterations_used = max_iter;
  return v;
}

inline ParameterClass classify_parameter(cplx rho, cplx lambda, const IterationBudget& budget = {}) {
  const FamilySlice s = make_slice(rho, lambda);
  const OrbitVerdict vl = classify_orbit(s, s.lambda, budget.max_iter, budget.tol, s.lambda, budget.trap_scale);
  const OrbitVerdict vm = classify_orbit(s, s.mu, budget.max_iter, budget.tol, s.mu, budget.trap_scale);
  ParameterClass c;
  if (vl.kind == OrbitKind::AttractedToCycle) c.period_lambda = vl.period;
  if (vm.kind == OrbitKind::AttractedToCycle) c.period_mu = vm.period;
  const bool l0 = vl.kind == OrbitKind::AttractedToOrigin;
  const bool m0 = vm.kind == OrbitKind::AttractedToOrigin;
  if (l0 && m0)
    c.region = Region::Shift;
  else if (vl.kind == OrbitKind::AttractedToCycle && m0)
    c.region = Region::MLambda;
  else if (vm.kind == OrbitKind::AttractedToCycle && l0)
    c.region = Region::MMu;
  else
    c.region = Region::Unresolved;
  return c;
}

}  // namespace atlas
