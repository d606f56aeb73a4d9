#pragma once

#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "raster.hpp"
#include "solvers.hpp"
#include "trace.hpp"

namespace atlas {

inline constexpr const char* kVersion = "0.1.0";

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// PPM and sidecar.

inline std::string ppm_bytes(const ClassificationGrid& g) {
  std::string out = "P6\n" + std::to_string(g.width) + " " + std::to_string(g.height) + "\n255\n";
  out.reserve(out.size() + g.cells.size() * 3);
  for (const auto& c : g.cells) {
    const Rgb p = pixel_color(c);
    out.push_back(static_cast<char>(p.r));
    out.push_back(static_cast<char>(p.g));
    out.push_back(static_cast<char>(p.b));
  }
  return out;
}

inline void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw std::runtime_error("write failed for " + path);
}

inline json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

inline json legend_json() {
  json l = json::object();
  for (const auto& e : kLegend) l[e.name] = json::array({e.color.r, e.color.g, e.color.b});
  return l;
}

inline json budget_json(const IterationBudget& b) {
  return {{"max_iter", b.max_iter}, {"tol", b.tol}, {"trap_scale", b.trap_scale}};
}

inline json render_sidecar(const RasterJob& job) {
  json j;
  j["version"] = kVersion;
  j["rho"] = complex_json(job.rho);
  j["window"] = {{"re_min", job.window.re_min}, {"re_max", job.window.re_max},
                 {"im_min", job.window.im_min}, {"im_max", job.window.im_max}};
  j["resolution"] = {{"width", job.width}, {"height", job.height}};
  j["budget"] = budget_json(job.budget);
  j["legend"] = legend_json();
  return j;
}

// ---------------------------------------------------------------------------
// Solver records.

inline json solve_record(const SolveResult& r) {
  json j;
  j["kind"] = boundary_kind_name(r.kind);
  j["rho"] = complex_json(r.rho);
  j["word"] = r.word;
  j["lambda_re"] = r.lambda.real();
  j["lambda_im"] = r.lambda.imag();
  j["residual"] = r.residual;
  if (r.kind == BoundaryKind::VirtualCenter) {
    j["pole_index"] = r.pole_index;
    j["steps_to_infinity"] = r.steps_to_infinity;
  }
  if (r.cycle_point) {
    j["cycle_re"] = r.cycle_point->real();
    j["cycle_im"] = r.cycle_point->imag();
  }
  if (r.multiplier) {
    j["multiplier_re"] = r.multiplier->real();
    j["multiplier_im"] = r.multiplier->imag();
    j["multiplier_abs"] = std::abs(*r.multiplier);
  }
  j["version"] = kVersion;
  return j;
}

inline json error_record(const std::string& kind, const std::string& word, const std::string& code,
                         const std::string& message) {
  return {{"kind", kind}, {"word", word}, {"error", code}, {"message", message}, {"version", kVersion}};
}

// ---------------------------------------------------------------------------
// Trace CSV.

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string csv_word(const std::vector<int>& w) {
  std::string s;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(w[i]);
  }
  return w.size() > 1 ? "\"" + s + "\"" : s;
}

inline std::string trace_csv(const TracedPath& p) {
  std::ostringstream o;
  o << "t,lambda_re,lambda_im,level,word\n";
  for (std::size_t i = 0; i < p.lambda_samples.size(); ++i)
    o << format_double(p.t_samples[i]) << ',' << format_double(p.lambda_samples[i].real()) << ','
      << format_double(p.lambda_samples[i].imag()) << ',' << format_double(p.levels[i]) << ','
      << csv_word(p.words[i]) << '\n';
  if (!p.lambda_samples.empty()) {
    const std::size_t i = p.lambda_samples.size() - 1;
    o << "terminal," << format_double(p.terminal_estimate.real()) << ',' << format_double(p.terminal_estimate.imag())
      << ',' << format_double(p.levels[i]) << ',' << csv_word(p.words[i]) << ','
      << (std::isfinite(p.solver_distance) ? format_double(p.solver_distance) : std::string("nan")) << '\n';
  }
  return o.str();
}

inline json trace_sidecar(const TracedPath& p, cplx rho, int samples, const TraceOptions& opt) {
  json j;
  j["version"] = kVersion;
  j["rho"] = complex_json(rho);
  j["target"] = p.target.to_string();
  j["target_kind"] = boundary_kind_name(p.target_kind);
  j["samples_per_branch"] = samples;
  j["depth"] = opt.depth > 0 ? opt.depth : default_trace_depth(p.target);
  j["tail_depth"] = opt.tail_depth;
  j["newton_tol"] = opt.newton_tol;
  j["budget"] = budget_json(opt.budget);
  j["stalled"] = p.stalled;
  if (p.stalled) j["stall_message"] = p.stall_message;
  double worst = 0.0;
  for (double r : p.residuals) worst = std::max(worst, r);
  j["max_residual"] = worst;
  j["terminal"] = complex_json(p.terminal_estimate);
  if (p.solver) {
    j["solver"] = solve_record(*p.solver);
    j["solver_distance"] = p.solver_distance;
  } else if (!p.solver_error.empty()) {
    j["solver_error"] = p.solver_error;
  }
  return j;
}

// ---------------------------------------------------------------------------
// Run configuration: a JSON document with one block per command; every
// field can be overridden from the command line.

struct SolveRequest {
  std::string kind;  // virtual_center | parabolic | misiurewicz
  std::string word;
  std::optional<cplx> seed_lambda;
  std::optional<cplx> seed_z;
  int k = 0;
  int n = 0;
};

struct RunConfig {
  cplx rho{2.0 / 3.0, 0.0};
  RasterJob render{};
  std::string render_output = "plane.ppm";
  std::vector<SolveRequest> solves;
  std::string trace_word = "0";
  int trace_samples = 64;
  TraceOptions trace{};
  std::string trace_output = "trace.csv";
};

inline cplx parse_complex(const json& v) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
    return {v[0].get<double>(), v[1].get<double>()};
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    const auto comma = s.find(',');
    try {
      if (comma == std::string::npos) return {std::stod(s), 0.0};
      return {std::stod(s.substr(0, comma)), std::stod(s.substr(comma + 1))};
    } catch (const std::exception&) {
    }
  }
  throw Error(Errc::ParseError, "expected a number, [re, im] or \"re,im\"");
}

inline cplx parse_complex(const std::string& s) { return parse_complex(json(s)); }

inline RunConfig parse_config(const json& j) {
  RunConfig c;
  try {
    if (j.contains("rho")) c.rho = parse_complex(j["rho"]);
    c.render.rho = c.rho;
    c.trace.budget = c.render.budget;
    if (j.contains("budget")) {
      const auto& b = j["budget"];
      c.render.budget.max_iter = b.value("max_iter", c.render.budget.max_iter);
      c.render.budget.tol = b.value("tol", c.render.budget.tol);
      c.render.budget.trap_scale = b.value("trap_scale", c.render.budget.trap_scale);
      c.trace.budget = c.render.budget;
    }
    if (j.contains("render")) {
      const auto& r = j["render"];
      if (r.contains("window")) {
        const auto& w = r["window"];
        if (!w.is_array() || w.size() != 4) throw Error(Errc::ParseError, "window is [re_min, re_max, im_min, im_max]");
        c.render.window = {w[0].get<double>(), w[1].get<double>(), w[2].get<double>(), w[3].get<double>()};
      }
      if (r.contains("resolution")) {
        const auto& s = r["resolution"];
        if (!s.is_array() || s.size() != 2) throw Error(Errc::ParseError, "resolution is [width, height]");
        c.render.width = s[0].get<int>();
        c.render.height = s[1].get<int>();
      }
      c.render_output = r.value("output", c.render_output);
    }
    if (j.contains("solve")) {
      for (const auto& q : j["solve"]) {
        SolveRequest s;
        s.kind = q.value("kind", std::string("virtual_center"));
        s.word = q.value("word", std::string());
        if (q.contains("seed")) s.seed_lambda = parse_complex(q["seed"]);
        if (q.contains("seed_lambda")) s.seed_lambda = parse_complex(q["seed_lambda"]);
        if (q.contains("seed_z")) s.seed_z = parse_complex(q["seed_z"]);
        s.k = q.value("k", 0);
        s.n = q.value("n", 0);
        c.solves.push_back(s);
      }
    }
    if (j.contains("trace")) {
      const auto& t = j["trace"];
      c.trace_word = t.value("word", c.trace_word);
      c.trace_samples = t.value("samples", c.trace_samples);
      c.trace.depth = t.value("depth", c.trace.depth);
      c.trace.tail_depth = t.value("tail_depth", c.trace.tail_depth);
      c.trace_output = t.value("output", c.trace_output);
    }
  } catch (const json::exception& e) {
    throw Error(Errc::ParseError, e.what());
  }
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(Errc::ParseError, "cannot read config " + path);
  json j;
  try {
    j = json::parse(f, nullptr, true, true);
  } catch (const json::exception& e) {
    throw Error(Errc::ParseError, e.what());
  }
  return parse_config(j);
}

}  // namespace atlas
