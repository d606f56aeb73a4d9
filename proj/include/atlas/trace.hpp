#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "emap.hpp"
#include "model.hpp"
#include "solvers.hpp"

namespace atlas {

struct TraceOptions {
  int depth = 0;             // interior branches for infinite targets; 0 uses default_trace_depth
  double tail_depth = 1e7;   // -log of the last angle on the final branch of a finite target
  double newton_tol = 1e-11;
  int newton_iter = 30;
  bool run_solver = true;
  IterationBudget budget{};
};

struct TracedPath {
  Itinerary target;
  BoundaryKind target_kind = BoundaryKind::VirtualCenter;
  std::vector<double> t_samples;
  std::vector<cplx> lambda_samples;
  std::vector<double> levels;             // model level of tau(t) = level of E(lambda(t))
  std::vector<std::vector<int>> words;    // fundamental-domain word of tau(t)
  std::vector<double> residuals;          // deep Newton residual per sample
  std::vector<bool> on_final_branch;
  cplx terminal_estimate{};
  std::optional<SolveResult> solver;
  double solver_distance = NAN;
  std::string solver_error;
  bool stalled = false;
  std::string stall_message;
};

inline BoundaryKind boundary_kind_of(const Itinerary& it) {
  if (it.is_finite_word()) return BoundaryKind::VirtualCenter;
  if (it.is_periodic()) return BoundaryKind::Parabolic;
  return BoundaryKind::MisiurewiczLike;
}

// Parabolic tails approach their landing point like 1/depth^2, Misiurewicz
// tails geometrically.
inline int default_trace_depth(const Itinerary& it) {
  const int pre = static_cast<int>(it.preperiod.size());
  const int per = static_cast<int>(it.period.size());
  if (it.is_periodic()) return 320 * per;
  if (it.is_preperiodic()) return pre + 32 * per;
  return 0;
}

// Real parameter with E(lambda) = root of the tree.
inline cplx root_parameter(const ModelMap& m) {
  const DeepCoordinate target = deep_target(m, m.root);
  double best = INFINITY;
  cplx seed{};
  for (double x = -6.0; x <= 6.0; x += 0.01) {
    const cplx l{x, 0.0};
    try {
      if (classify_parameter(m.rho(), l).region != Region::Shift) continue;
      const EValue e = E_map(m, l);
      const double d = std::abs(e.value - m.root);
      if (d < best) {
        best = d;
        seed = l;
      }
    } catch (const Error&) {
    }
  }
  if (!std::isfinite(best)) throw Error(Errc::NoConvergence, "no real shift parameter found for the root");
  return E_inverse_deep(m, target, seed).lambda;
}

inline TracedPath trace_accessibility_path(const ModelMap& m, const Itinerary& target, int steps,
                                           const TraceOptions& opt = {}) {
  if (steps < 32) throw Error(Errc::InadmissibleWord, "at least 32 samples per branch are required");
  TracedPath out;
  out.target = target;
  out.target_kind = boundary_kind_of(target);
  const TreePath tp = tree_path(m, target, steps, opt.depth > 0 ? opt.depth : default_trace_depth(target), opt.tail_depth);
  const double ar = std::abs(m.lin.multiplier);
  const std::size_t final_start = target.is_finite_word() ? tp.node_indices.back() : tp.z.size();

  auto record = [&](std::size_t i, cplx l, double res) {
    out.t_samples.push_back(tp.t[i]);
    out.lambda_samples.push_back(l);
    out.levels.push_back(tp.deep[i].level(ar));
    out.words.push_back(tp.words[i]);
    out.residuals.push_back(res);
    out.on_final_branch.push_back(i >= final_start);
  };

  cplx prev = root_parameter(m);
  {
    const InverseResult r = E_inverse_deep(m, tp.deep[0], prev, opt.newton_tol, opt.newton_iter);
    prev = r.lambda;
    record(0, prev, r.residual);
  }
  std::optional<cplx> prev2;
  std::optional<int> lift;
  double prev_ds = 1.0;  // parameter length of the last accepted step, in sample units
  double h = 1.0;
  for (std::size_t i = 1; i < tp.z.size(); ++i) {
    double u = 0.0;
    // the tree turns at nodes; restart the predictor there
    if (std::find(tp.node_indices.begin(), tp.node_indices.end(), i - 1) != tp.node_indices.end()) prev2.reset();
    while (u < 1.0) {
      const double ub = std::min(1.0, u + h);
      const DeepCoordinate goal = ub >= 1.0 ? tp.deep[i] : interpolate(m, tp.deep[i - 1], tp.deep[i], ub);
      const double ds = ub - u;
      const cplx pred = prev2 ? prev + (prev - *prev2) * (ds / prev_ds) : prev;
      bool ok = false;
      InverseResult r{};
      try {
        const std::optional<int> sheet = goal.tract ? lift : std::nullopt;
        r = E_inverse_deep(m, goal, pred, opt.newton_tol, opt.newton_iter, sheet);
        // reject solutions that wander much further than the predicted step
        const double expected = std::abs(pred - prev);
        ok = !prev2 || sheet || std::abs(r.lambda - prev) <= 3.0 * expected + 1e-12 * std::max(1.0, std::abs(prev));
        if (!ok) {
          // the path may turn or speed up inside a branch; accept when an unpredicted solve agrees
          const InverseResult r2 = E_inverse_deep(m, goal, prev, opt.newton_tol, opt.newton_iter, sheet);
          ok = std::abs(r2.lambda - r.lambda) <= 1e-9 * std::max(1.0, std::abs(r.lambda));
        }
        if (ok) ok = classify_parameter(m.rho(), r.lambda, opt.budget).region == Region::Shift;
      } catch (const Error&) {
        ok = false;
      }
      if (!ok) {
        h *= 0.5;
        if (h < 1e-6) {
          out.stalled = true;
          out.stall_message = "continuation stalled at sample " + std::to_string(i);
          break;
        }
        continue;
      }
      if (goal.tract && !lift) lift = tract_lift(m, r.lambda, goal);
      prev2 = prev;
      prev = r.lambda;
      prev_ds = ds;
      u = ub;
      if (ub >= 1.0) record(i, prev, r.residual);
      h = std::min(1.0, 2.0 * h);
    }
    if (out.stalled) break;
  }
  out.terminal_estimate = out.lambda_samples.back();
  if (!opt.run_solver || out.stalled) return out;

  try {
    const cplx tail = out.terminal_estimate;
    const FamilySlice s = make_slice(m.rho(), tail);
    if (out.target_kind == BoundaryKind::VirtualCenter) {
      out.solver = virtual_center_solve(m.rho(), target, tail);
    } else if (out.target_kind == BoundaryKind::Parabolic) {
      const int n = static_cast<int>(target.period.size());
      out.solver = parabolic_solve(m.rho(), n, tail, parabolic_cycle_seed(s, tail, n));
      out.solver->word = target.to_string();
    } else {
      const int k = static_cast<int>(target.preperiod.size());
      const int n = static_cast<int>(target.period.size());
      out.solver = misiurewicz_solve(m.rho(), k, n, tail, misiurewicz_cycle_seed(s, tail, k));
      out.solver->word = target.to_string();
    }
    out.solver_distance = std::abs(out.solver->lambda - out.terminal_estimate);
  } catch (const Error& e) {
    out.solver_error = std::string(errc_name(e.code())) + ": " + e.what();
  }
  return out;
}

}  // namespace atlas
