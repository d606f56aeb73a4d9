#pragma once

#include <array>
#include <cstdint>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

#include "orbit.hpp"

namespace atlas {

struct Window {
  double re_min = -3.0, re_max = 5.0, im_min = -4.0, im_max = 4.0;
};

struct RasterJob {
  cplx rho{2.0 / 3.0, 0.0};
  Window window{};
  int width = 400;
  int height = 400;
  IterationBudget budget{};
};

inline void validate(const RasterJob& job) {
  const Window& w = job.window;
  if (!(w.re_max > w.re_min) || !(w.im_max > w.im_min)) throw Error(Errc::ParseError, "window must have positive extents");
  if (job.width <= 0 || job.height <= 0) throw Error(Errc::ParseError, "resolution must be positive");
  if (!(std::abs(job.rho) > 0.0 && std::abs(job.rho) < 1.0)) throw Error(Errc::BadMultiplier, "|rho| must lie in (0,1)");
}

// Row-major grid; row 0 is the top of the window (im_max).
struct ClassificationGrid {
  int width = 0, height = 0;
  std::vector<ParameterClass> cells;

  const ParameterClass& at(int x, int y) const { return cells[static_cast<std::size_t>(y) * width + x]; }
};

inline cplx pixel_center(const RasterJob& job, int x, int y) {
  const Window& w = job.window;
  return {w.re_min + (x + 0.5) * (w.re_max - w.re_min) / job.width,
          w.im_max - (y + 0.5) * (w.im_max - w.im_min) / job.height};
}

// Pixel containing lambda, or {-1,-1} outside the window.
inline std::array<int, 2> pixel_of(const RasterJob& job, cplx lambda) {
  const Window& w = job.window;
  const int x = static_cast<int>(std::floor((lambda.real() - w.re_min) / (w.re_max - w.re_min) * job.width));
  const int y = static_cast<int>(std::floor((w.im_max - lambda.imag()) / (w.im_max - w.im_min) * job.height));
  if (x < 0 || y < 0 || x >= job.width || y >= job.height) return {-1, -1};
  return {x, y};
}

inline ParameterClass classify_pixel(const RasterJob& job, cplx lambda) {
  try {
    return classify_parameter(job.rho, lambda, job.budget);
  } catch (const Error&) {
    return ParameterClass{};
  }
}

// ATLAS_THREADS caps the worker count; unset means hardware concurrency.
inline int raster_threads(int requested = 0) {
  int n = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
  if (const char* env = std::getenv("ATLAS_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) n = requested > 0 ? std::min(n, cap) : cap;
  }
  return std::max(1, n);
}

inline ClassificationGrid render_parameter_plane(const RasterJob& job, int threads = 0) {
  validate(job);
  ClassificationGrid g;
  g.width = job.width;
  g.height = job.height;
  g.cells.resize(static_cast<std::size_t>(job.width) * job.height);
  const int nt = std::min(raster_threads(threads), job.height);
  auto rows = [&](int first) {
    for (int y = first; y < job.height; y += nt)
      for (int x = 0; x < job.width; ++x)
        g.cells[static_cast<std::size_t>(y) * job.width + x] = classify_pixel(job, pixel_center(job, x, y));
  };
  if (nt == 1) {
    rows(0);
    return g;
  }
  std::vector<std::thread> pool;
  for (int t = 0; t < nt; ++t) pool.emplace_back(rows, t);
  for (auto& th : pool) th.join();
  return g;
}

// ---------------------------------------------------------------------------
// Colors.

struct Rgb {
  std::uint8_t r, g, b;
  bool operator==(const Rgb&) const = default;
};

struct LegendEntry {
  const char* name;
  Rgb color;
};

inline constexpr std::array<LegendEntry, 6> kLegend{{
    {"Shift", {0, 170, 0}},
    {"period1", {255, 255, 0}},
    {"period2", {0, 255, 255}},
    {"period3", {255, 0, 0}},
    {"period4", {240, 230, 140}},
    {"other", {128, 128, 128}},
}};

inline Rgb pixel_color(const ParameterClass& c) {
  if (c.region == Region::Shift) return kLegend[0].color;
  const int p = c.shell_period();
  if (p >= 1 && p <= 4) return kLegend[static_cast<std::size_t>(p)].color;
  return kLegend[5].color;
}

}  // namespace atlas
