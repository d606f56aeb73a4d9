#pragma once

#include <random>

#include <atlas/atlas.hpp>

namespace testing {

using atlas::cplx;

inline const atlas::ModelMap& model() {
  static const atlas::ModelMap m = atlas::model_setup(cplx{2.0 / 3.0, 0.0});
  return m;
}

inline cplx rho() { return {2.0 / 3.0, 0.0}; }

inline cplx uniform_in_box(std::mt19937_64& g, double lo_re, double hi_re, double lo_im, double hi_im) {
  std::uniform_real_distribution<double> re(lo_re, hi_re), im(lo_im, hi_im);
  const double x = re(g);
  return {x, im(g)};
}

inline cplx uniform_in_disk(std::mt19937_64& g, double radius) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double r = radius * std::sqrt(u(g));
  return std::polar(r, 2.0 * atlas::kPi * u(g));
}

}  // namespace testing
