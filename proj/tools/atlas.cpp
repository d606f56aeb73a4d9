#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include <atlas/atlas.hpp>

namespace {

using namespace atlas;

constexpr int kExitOk = 0;
constexpr int kExitPartial = 2;
constexpr int kExitConfig = 3;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Window parse_window(const std::string& s) {
  double v[4];
  if (std::sscanf(s.c_str(), "%lf,%lf,%lf,%lf", &v[0], &v[1], &v[2], &v[3]) != 4)
    throw ConfigError("window must be re_min,re_max,im_min,im_max");
  return {v[0], v[1], v[2], v[3]};
}

void parse_size(const std::string& s, int& w, int& h) {
  if (std::sscanf(s.c_str(), "%dx%d", &w, &h) != 2) throw ConfigError("size must be WIDTHxHEIGHT");
}

cplx complex_arg(const std::string& s) {
  try {
    return parse_complex(s);
  } catch (const Error& e) {
    throw ConfigError(std::string("bad complex value '") + s + "': " + e.what());
  }
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-")
    std::cout << text;
  else
    write_file(path, text);
}

std::string sidecar_path(const std::string& out) {
  const auto dot = out.rfind('.');
  const auto slash = out.rfind('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return out + ".json";
  return out.substr(0, dot) + ".json";
}

// ---------------------------------------------------------------------------

struct Options {
  std::string config;
  std::string rho;
  // render
  std::string window, size, render_out;
  int max_iter = 0;
  int threads = 0;
  // classify
  std::string lambda;
  // solve
  std::string kind, word, seed, seed_z, solve_out;
  int k = 0, n = 0;
  // trace
  std::string trace_word, trace_out;
  int samples = 0, depth = 0;
  double tail_depth = 0.0;
};

RunConfig base_config(const Options& o) {
  RunConfig c;
  if (!o.config.empty()) c = load_config(o.config);
  if (!o.rho.empty()) c.rho = complex_arg(o.rho);
  c.render.rho = c.rho;
  if (o.max_iter > 0) {
    c.render.budget.max_iter = o.max_iter;
    c.trace.budget.max_iter = o.max_iter;
  }
  return c;
}

int cmd_render(const Options& o) {
  RunConfig c = base_config(o);
  if (!o.window.empty()) c.render.window = parse_window(o.window);
  if (!o.size.empty()) parse_size(o.size, c.render.width, c.render.height);
  if (!o.render_out.empty()) c.render_output = o.render_out;
  try {
    validate(c.render);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  const ClassificationGrid g = render_parameter_plane(c.render, o.threads);
  write_file(c.render_output, ppm_bytes(g));
  write_file(sidecar_path(c.render_output), render_sidecar(c.render).dump(2) + "\n");
  return kExitOk;
}

int cmd_classify(const Options& o) {
  RunConfig c = base_config(o);
  if (o.lambda.empty()) throw ConfigError("--lambda is required");
  const cplx l = complex_arg(o.lambda);
  json j;
  j["rho"] = complex_json(c.rho);
  j["lambda"] = complex_json(l);
  try {
    const ParameterClass pc = classify_parameter(c.rho, l, c.render.budget);
    j["region"] = region_name(pc.region);
    j["period_lambda"] = pc.period_lambda ? json(*pc.period_lambda) : json(nullptr);
    j["period_mu"] = pc.period_mu ? json(*pc.period_mu) : json(nullptr);
  } catch (const Error& e) {
    j["error"] = errc_name(e.code());
    j["message"] = e.what();
    std::cout << j.dump() << "\n";
    return kExitConfig;
  }
  j["budget"] = budget_json(c.render.budget);
  j["version"] = kVersion;
  std::cout << j.dump() << "\n";
  return kExitOk;
}

std::string kind_key(std::string k) {
  for (auto& ch : k)
    if (ch == '-') ch = '_';
  return k;
}

// Returns 0 on success, kExitPartial on solver failure, kExitConfig on bad input.
int solve_one(const RunConfig& c, const SolveRequest& q, std::optional<ModelMap>& model, std::string& out) {
  const std::string kind = kind_key(q.kind);
  Itinerary word;
  try {
    if (!q.word.empty()) word = parse_itinerary(q.word);
  } catch (const Error& e) {
    out += error_record(kind, q.word, errc_name(e.code()), e.what()).dump() + "\n";
    return kExitConfig;
  }
  try {
    SolveResult r;
    const bool have_seed = q.seed_lambda.has_value();
    if (!have_seed) {
      // seed from the tail of the accessibility path of the word
      if (q.word.empty()) throw Error(Errc::InadmissibleWord, "a word or a seed is required");
      if (word.is_infinity_terminal || kind != boundary_kind_name(boundary_kind_of(word)))
        throw Error(Errc::InadmissibleWord, "word does not name a boundary point of this kind");
      if (!model) model = model_setup(c.rho);
      TraceOptions opt = c.trace;
      const TracedPath p = trace_accessibility_path(*model, word, c.trace_samples, opt);
      if (p.stalled) throw Error(Errc::ContinuationStalled, p.stall_message);
      if (!p.solver) throw Error(Errc::NoConvergence, p.solver_error);
      r = *p.solver;
    } else if (kind == "virtual_center") {
      r = virtual_center_solve(c.rho, word, *q.seed_lambda);
    } else if (kind == "parabolic") {
      const int n = q.n > 0 ? q.n : static_cast<int>(word.period.size());
      const cplx z = q.seed_z ? *q.seed_z : parabolic_cycle_seed(make_slice(c.rho, *q.seed_lambda), *q.seed_lambda, n);
      r = parabolic_solve(c.rho, n, *q.seed_lambda, z);
      if (!q.word.empty()) r.word = word.to_string();
    } else if (kind == "misiurewicz") {
      const int k = q.k > 0 ? q.k : static_cast<int>(word.preperiod.size());
      const int n = q.n > 0 ? q.n : static_cast<int>(word.period.size());
      const cplx z = q.seed_z ? *q.seed_z : misiurewicz_cycle_seed(make_slice(c.rho, *q.seed_lambda), *q.seed_lambda, k);
      r = misiurewicz_solve(c.rho, k, n, *q.seed_lambda, z);
      if (!q.word.empty()) r.word = word.to_string();
    } else {
      out += error_record(kind, q.word, "ParseError", "unknown solve kind").dump() + "\n";
      return kExitConfig;
    }
    out += solve_record(r).dump() + "\n";
    return kExitOk;
  } catch (const Error& e) {
    out += error_record(kind, q.word, errc_name(e.code()), e.what()).dump() + "\n";
    return e.code() == Errc::ParseError || e.code() == Errc::InadmissibleWord || e.code() == Errc::BadMultiplier
               ? kExitConfig
               : kExitPartial;
  }
}

int cmd_solve(const Options& o) {
  RunConfig c = base_config(o);
  if (o.samples > 0) c.trace_samples = o.samples;
  std::vector<SolveRequest> reqs = c.solves;
  if (!o.kind.empty() || !o.word.empty()) {
    SolveRequest q;
    q.kind = o.kind.empty() ? "virtual_center" : o.kind;
    q.word = o.word;
    if (!o.seed.empty()) q.seed_lambda = complex_arg(o.seed);
    if (!o.seed_z.empty()) q.seed_z = complex_arg(o.seed_z);
    q.k = o.k;
    q.n = o.n;
    reqs.push_back(q);
  }
  if (reqs.empty()) throw ConfigError("no solve requests");
  std::optional<ModelMap> model;
  std::string out;
  int code = kExitOk;
  for (const auto& q : reqs) code = std::max(code, solve_one(c, q, model, out));
  emit(o.solve_out, out);
  return code;
}

int cmd_trace(const Options& o) {
  RunConfig c = base_config(o);
  if (!o.trace_word.empty()) c.trace_word = o.trace_word;
  if (o.samples > 0) c.trace_samples = o.samples;
  if (o.depth > 0) c.trace.depth = o.depth;
  if (o.tail_depth > 0.0) c.trace.tail_depth = o.tail_depth;
  if (!o.trace_out.empty()) c.trace_output = o.trace_out;
  Itinerary word;
  try {
    word = parse_itinerary(c.trace_word);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (word.is_infinity_terminal) throw ConfigError("the infinity symbol has no accessibility path");
  if (c.trace_samples < 32) throw ConfigError("samples must be at least 32");
  const ModelMap m = model_setup(c.rho);
  const TracedPath p = trace_accessibility_path(m, word, c.trace_samples, c.trace);
  emit(c.trace_output, trace_csv(p));
  if (!c.trace_output.empty() && c.trace_output != "-")
    write_file(sidecar_path(c.trace_output), trace_sidecar(p, c.rho, c.trace_samples, c.trace).dump(2) + "\n");
  if (p.stalled) {
    std::cerr << "ContinuationStalled: " << p.stall_message << "\n";
    return kExitPartial;
  }
  if (!p.solver) {
    std::cerr << "solver cross-check failed: " << p.solver_error << "\n";
    return kExitPartial;
  }
  return kExitOk;
}

int cmd_model_info(const Options& o) {
  RunConfig c = base_config(o);
  const ModelMap m = model_setup(c.rho);
  json j;
  j["version"] = kVersion;
  j["rho"] = complex_json(c.rho);
  j["lambda0"] = complex_json(m.lambda0());
  j["mu0"] = complex_json(m.slice.mu);
  j["q0"] = complex_json(m.q0);
  j["multiplier_q0"] = complex_json(m.lin.multiplier);
  j["r0"] = m.r0;
  j["root"] = complex_json(m.root);
  json poles = json::object();
  for (int k = -2; k <= 2; ++k) poles[std::to_string(k)] = complex_json(pole(m.slice, k));
  j["poles"] = poles;
  std::cout << j.dump(2) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parameter atlas for f(z) = (e^z - e^-z)/(e^z/lambda - e^-z/mu)"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--config", o.config, "JSON run configuration");
  app.add_option("--rho", o.rho, "multiplier at 0 (re or re,im)");

  auto* render = app.add_subcommand("render", "classify a window of the lambda plane into a PPM");
  render->add_option("--window", o.window, "re_min,re_max,im_min,im_max");
  render->add_option("--size", o.size, "WIDTHxHEIGHT");
  render->add_option("--out", o.render_out, "PPM output path (sidecar .json next to it)");
  render->add_option("--max-iter", o.max_iter, "iteration budget per orbit");
  render->add_option("--threads", o.threads, "worker threads (ATLAS_THREADS caps)");

  auto* classify = app.add_subcommand("classify", "classify a single parameter");
  classify->add_option("--lambda", o.lambda, "parameter (re,im)")->required();
  classify->add_option("--max-iter", o.max_iter, "iteration budget per orbit");

  auto* solve = app.add_subcommand("solve", "solve for boundary parameters");
  solve->add_option("--kind", o.kind, "virtual-center | parabolic | misiurewicz");
  solve->add_option("--word", o.word, "itinerary, e.g. 0, |0, 1|0");
  solve->add_option("--seed", o.seed, "seed lambda (re,im); default: tail of the traced path");
  solve->add_option("--seed-z", o.seed_z, "seed cycle point (re,im)");
  solve->add_option("--k", o.k, "preperiod for misiurewicz");
  solve->add_option("--n", o.n, "period for parabolic / misiurewicz");
  solve->add_option("--samples", o.samples, "samples per branch when seeding from a trace");
  solve->add_option("--out", o.solve_out, "JSON-lines output (default stdout)");

  auto* trace = app.add_subcommand("trace", "trace an accessibility path from inside the shift locus");
  trace->add_option("--word", o.trace_word, "target itinerary");
  trace->add_option("--samples", o.samples, "samples per branch (>= 32)");
  trace->add_option("--depth", o.depth, "branches for infinite targets");
  trace->add_option("--tail-depth", o.tail_depth, "-log of the last angle for finite targets");
  trace->add_option("--out", o.trace_out, "CSV output path ('-' for stdout)");

  auto* info = app.add_subcommand("model-info", "print the model map constants");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (render->parsed()) return cmd_render(o);
    if (classify->parsed()) return cmd_classify(o);
    if (solve->parsed()) return cmd_solve(o);
    if (trace->parsed()) return cmd_trace(o);
    if (info->parsed()) return cmd_model_info(o);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    std::cerr << errc_name(e.code()) << ": " << e.what() << "\n";
    return e.code() == Errc::ParseError || e.code() == Errc::BadMultiplier ? kExitConfig : kExitPartial;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitPartial;
  }
  return kExitConfig;
}
