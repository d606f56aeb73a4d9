#include "doctest.h"

#include <optional>
#include <set>

#include "common.hpp"

using namespace atlas;
using testing::rho;

namespace {

// Real-line oracle for the model parameter, independent of the library:
// for each lambda find the largest positive fixed point of f_lambda on (0, 10)
// and bisect lambda on f'(q(lambda)) - rho.
struct RealFamily {
  double lambda, mu;
  explicit RealFamily(double l) : lambda(l), mu(1.0 / (1.0 / l - 3.0)) {}
  double f(double x) const { return (std::exp(x) - std::exp(-x)) / (std::exp(x) / lambda - std::exp(-x) / mu); }
  double df(double x) const {
    const double h = 1e-6;
    return (f(x + h) - f(x - h)) / (2.0 * h);
  }
  // first (or last) sign change of f(x) - x on [lo, hi]
  std::optional<double> fixed_point(double lo, double hi, bool last = false) const {
    auto g = [&](double x) { return f(x) - x; };
    std::optional<double> found;
    double a = lo, ga = g(a);
    for (double b = lo + 1e-3; b <= hi; b += 1e-3) {
      const double gb = g(b);
      if (std::isfinite(ga) && std::isfinite(gb) && ga * gb < 0.0 && std::abs(ga - gb) < 1.0) {
        double x0 = a, x1 = b;
        for (int i = 0; i < 100; ++i) {
          const double c = 0.5 * (x0 + x1);
          ((g(c) < 0.0) == (g(x0) < 0.0) ? x0 : x1) = c;
        }
        found = 0.5 * (x0 + x1);
        if (!last) return found;
      }
      a = b;
      ga = gb;
    }
    return found;
  }
};

double oracle_lambda0() {
  auto h = [](double l) -> std::optional<double> {
    const RealFamily F(l);
    const auto q = F.fixed_point(0.05, 10.0, true);
    if (!q) return std::nullopt;
    return F.df(*q) - 2.0 / 3.0;
  };
  std::optional<double> prev;
  double lp = 0.0;
  for (double l = 0.35; l < 5.0; l += 0.01) {
    const auto v = h(l);
    if (v && prev && (*v) * (*prev) < 0.0) {
      double a = lp, b = l, ha = *prev;
      for (int i = 0; i < 60; ++i) {
        const double c = 0.5 * (a + b);
        const auto hc = h(c);
        if (!hc) break;
        if ((*hc) * ha < 0.0) {
          b = c;
        } else {
          a = c;
          ha = *hc;
        }
      }
      return 0.5 * (a + b);
    }
    prev = v;
    lp = l;
  }
  return NAN;
}

std::vector<std::vector<int>> words_up_to(int len, int lo, int hi) {
  std::vector<std::vector<int>> out{{}};
  std::vector<std::vector<int>> all;
  for (int n = 1; n <= len; ++n) {
    std::vector<std::vector<int>> next;
    for (const auto& w : out)
      for (int j = lo; j <= hi; ++j) {
        auto v = w;
        v.push_back(j);
        next.push_back(v);
        all.push_back(v);
      }
    out = next;
  }
  return all;
}

FatouCoordinate random_coordinate(std::mt19937_64& g, const ModelMap& m) {
  std::uniform_int_distribution<int> len(1, 3), sym(-2, 2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double ar = std::abs(m.lin.multiplier);
  FatouCoordinate c;
  const int n = len(g);
  for (int i = 0; i < n; ++i) c.word.push_back(sym(g));
  const double rn = c.is_a_type() ? m.r0 * (ar + (1.0 - ar) * (0.02 + 0.96 * u(g))) : m.r0 * (0.05 + 0.9 * u(g));
  c.r = rn / std::pow(ar, n);
  const double t = -kPi + 2.0 * kPi * u(g);
  c.theta = t + kPi * (n - 1);
  return c;
}

}  // namespace

TEST_CASE("model_setup at rho0 = 2/3") {
  const ModelMap& m = testing::model();
  CHECK(m.lambda0().imag() == 0.0);
  CHECK(m.lambda0().real() > 0.0);
  CHECK(std::abs(deriv(m.slice, m.q0) - 2.0 / 3.0) <= 1e-10);
  CHECK(std::abs(deriv(m.slice, cplx{}) - 2.0 / 3.0) <= 1e-12);
  const OrbitVerdict vl = classify_orbit(m.slice, m.lambda0(), 2000, 1e-6);
  CHECK(vl.kind == OrbitKind::AttractedToCycle);
  CHECK(vl.period == 1);
  CHECK(classify_orbit(m.slice, m.slice.mu, 2000, 1e-6, m.slice.mu).kind == OrbitKind::AttractedToOrigin);
  CHECK(std::abs(m.lambda0().real() - oracle_lambda0()) <= 1e-8);
  CHECK(m.lambda0().real() == doctest::Approx(2.0212903454).epsilon(1e-10));
}

TEST_CASE("model_setup errors") {
  CHECK_THROWS_AS((void)model_setup(cplx{1.2, 0.0}), Error);
  try {
    (void)model_setup(cplx{0.3, 0.4});
    FAIL("complex rho0 is not supported");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NoSolutionInWindow);
  }
}

TEST_CASE("prepoles") {
  const ModelMap& m = testing::model();
  for (int j = -3; j <= 3; ++j) CHECK(prepole_point(m, Itinerary::finite({j})) == pole(m.slice, j));
  for (const auto& w : words_up_to(3, -2, 2)) {
    const cplx z = prepole_point(m, Itinerary::finite(w));
    const Itinerary s = Itinerary::finite(w).shift();
    if (s.is_infinity_terminal) {
      CHECK(eval(m.slice, z).infinite);
    } else {
      CHECK(std::abs(evalf(m.slice, z) - prepole_point(m, s)) <= 1e-9);
    }
  }
  std::vector<cplx> two;
  for (const auto& w : words_up_to(2, -2, 2))
    if (w.size() == 2) two.push_back(prepole_point(m, Itinerary::finite(w)));
  REQUIRE(two.size() == 25);
  double dmin = INFINITY;
  for (std::size_t a = 0; a < two.size(); ++a)
    for (std::size_t b = a + 1; b < two.size(); ++b) dmin = std::min(dmin, std::abs(two[a] - two[b]));
  CHECK(dmin >= 1e-6);
}

TEST_CASE("periodic points") {
  const ModelMap& m = testing::model();
  const cplx z = periodic_point(m, Itinerary::periodic({0}));
  CHECK(std::abs(evalf(m.slice, z) - z) <= 1e-9);
  CHECK(std::abs(deriv(m.slice, z)) > 1.0);
  // the repelling real fixed point below q0, by bisection on the real line
  const auto y = RealFamily(m.lambda0().real()).fixed_point(0.05, 1.2);
  REQUIRE(y);
  CHECK(std::abs(cplx{*y, 0.0} - z) <= 1e-8);

  std::vector<cplx> fixed;
  for (int j = -2; j <= 2; ++j) fixed.push_back(periodic_point(m, Itinerary::periodic({j})));
  for (std::size_t a = 0; a < fixed.size(); ++a)
    for (std::size_t b = a + 1; b < fixed.size(); ++b) CHECK(std::abs(fixed[a] - fixed[b]) > 1e-6);

  for (const auto& w : words_up_to(2, -2, 2)) {
    const Itinerary it = Itinerary::periodic(w);
    const cplx p = periodic_point(m, it);
    const auto [qn, dqn] = iterate_with_derivative(m.slice, p, static_cast<int>(w.size()));
    CHECK(std::abs(qn - p) <= 1e-9);
    CHECK(std::abs(dqn) > 1.0);
    CHECK(std::abs(evalf(m.slice, p) - periodic_point(m, it.shift())) <= 1e-9);
  }
}

TEST_CASE("preperiodic points") {
  const ModelMap& m = testing::model();
  const Itinerary w = parse_itinerary("1|0");
  const cplx z = preperiodic_point(m, w);
  const cplx fixed = periodic_point(m, Itinerary::periodic({0}));
  CHECK(std::abs(evalf(m.slice, z) - fixed) <= 1e-9);
  CHECK(branch_index(m.slice, z) == 1);
  CHECK(branch_index(m.slice, fixed) == 0);
  CHECK(std::abs(deriv(m.slice, fixed)) > 1.0);

  const Itinerary w2 = parse_itinerary("2,-1|1,0");
  const cplx z2 = preperiodic_point(m, w2);
  cplx y = z2;
  for (std::size_t k = 0; k < 6; ++k) {
    CHECK(branch_index(m.slice, y) == w2.symbol(k));
    y = evalf(m.slice, y);
  }
  const auto [c, dc] = iterate_with_derivative(m.slice, evalf(m.slice, evalf(m.slice, z2)), 2);
  CHECK(std::abs(dc) > 1.0);
  (void)c;
}

TEST_CASE("fixed point preimages") {
  const ModelMap& m = testing::model();
  for (int j = -3; j <= 3; ++j)
    CHECK(std::abs(fixed_point_preimage(m, Itinerary::finite({j})) - (m.q0 + kI * (kPi * j))) <= 1e-12);
  CHECK(std::abs(fixed_point_preimage(m, Itinerary::finite({0})) - m.q0) <= 1e-14);
  const cplx z = fixed_point_preimage(m, Itinerary::finite({1, 2}));
  CHECK(std::abs(evalf(m.slice, evalf(m.slice, z)) - m.q0) <= 1e-9);
  for (int j = -3; j <= 3; ++j) CHECK(std::abs(inverse_branch(m.slice, j, m.q0) - (m.q0 + kI * (kPi * j))) <= 1e-12);
}

TEST_CASE("coordinate charts") {
  const ModelMap& m = testing::model();
  const cplx inside = koenigs_inverse(m.lin, std::polar(0.5 * m.r0, 0.7));
  const FatouCoordinate c0 = coordinate_chart(m, inside);
  CHECK(c0.n() == 0);
  CHECK(c0.r < m.r0);
  const cplx w = annulus_point(m, 0, std::polar(0.8 * m.r0, 2.0));
  for (int j = -2; j <= 2; ++j) {
    const FatouCoordinate c = coordinate_chart(m, inverse_branch(m.slice, j, w));
    REQUIRE(c.n() >= 1);
    CHECK(c.word.front() == j);
  }
  try {
    (void)coordinate_chart(m, cplx{});
    FAIL("0 is not in K0");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NotInK0);
  }
}

TEST_CASE("chart of Q(z) is the shifted chart") {
  const ModelMap& m = testing::model();
  const double ar = std::abs(m.lin.multiplier);
  std::mt19937_64 g(53);
  for (int i = 0; i < 100; ++i) {
    const FatouCoordinate c = random_coordinate(g, m);
    const cplx z = point_from_coordinate(m, c);
    const FatouCoordinate s = coordinate_chart(m, evalf(m.slice, z));
    CHECK(s.word == std::vector<int>(c.word.begin() + 1, c.word.end()));
    CHECK(s.r == doctest::Approx(c.r * ar).epsilon(1e-9));
  }
}

TEST_CASE("chart bijectivity on random admissible coordinates") {
  const ModelMap& m = testing::model();
  std::mt19937_64 g(59);
  for (int i = 0; i < 200; ++i) {
    const FatouCoordinate c = random_coordinate(g, m);
    const cplx z = point_from_coordinate(m, c);
    const FatouCoordinate back = coordinate_chart(m, z);
    CHECK(back.word == c.word);
    CHECK(std::abs(point_from_coordinate(m, back) - z) <= 1e-8);
    CHECK(back.r == doctest::Approx(c.r).epsilon(1e-8));
  }
}

TEST_CASE("point_from_coordinate geometry and equivariance") {
  const ModelMap& m = testing::model();
  const double ar = std::abs(m.lin.multiplier);
  for (int j = -2; j <= 2; ++j) {
    for (double t = -3.0; t < 3.1; t += 0.5) {
      FatouCoordinate c{{j}, m.r0 * (1.0 + 1e-3), t};
      const cplx z = point_from_coordinate(m, c);
      CHECK(z.imag() > pole(m.slice, j).imag() - kPi / 2 - 0.5);
      CHECK(z.imag() < pole(m.slice, j + 1).imag() + 0.5);
    }
  }
  std::mt19937_64 g(61);
  for (int i = 0; i < 100; ++i) {
    const FatouCoordinate c = random_coordinate(g, m);
    const FatouCoordinate s{{c.word.begin() + 1, c.word.end()}, c.r * ar, c.theta - kPi};
    CHECK(std::abs(point_from_coordinate(m, s) - evalf(m.slice, point_from_coordinate(m, c))) <= 1e-9);
  }
  auto code = [&](const FatouCoordinate& c) {
    try {
      (void)point_from_coordinate(m, c);
    } catch (const Error& e) {
      return e.code();
    }
    return Errc::ParseError;
  };
  CHECK(code({{1, 0}, 1.01 * m.r0, 0.3}) == Errc::InadmissibleWord);
  CHECK(code({{2}, 2.0 * m.r0 / ar, 0.3}) == Errc::InadmissibleWord);
}

TEST_CASE("tree path to a pole") {
  const ModelMap& m = testing::model();
  const TreePath p = tree_path(m, parse_itinerary("0"), 64);
  REQUIRE(p.node_indices.size() == 2);
  CHECK(std::abs(p.z.back() - pole(m.slice, 0)) <= 1e-6);
  CHECK(std::abs(p.z.front() - m.root) <= 1e-12);
  for (std::size_t i = 1; i < p.t.size(); ++i) CHECK(p.t[i] > p.t[i - 1]);
  for (double t : p.t) CHECK((t >= 0.0 && t < 1.0));
  const double ar = std::abs(m.lin.multiplier);
  for (std::size_t i = p.node_indices.back() + 1; i < p.deep.size(); ++i)
    CHECK(p.deep[i].level(ar) >= p.deep[i - 1].level(ar) * (1.0 - 1e-12));
  for (std::size_t i = 0; i < p.z.size(); ++i) {
    if (p.deep[i].tract) continue;
    CHECK(model_level(m, p.z[i]) > 0.0);
  }
}

TEST_CASE("tree path to the fixed point with itinerary 0") {
  const ModelMap& m = testing::model();
  const cplx target = periodic_point(m, Itinerary::periodic({0}));
  const TreePath p = tree_path(m, Itinerary::periodic({0}), 64, 80);
  CHECK(std::abs(p.z.back() - target) <= 1e-5);
  const std::size_t len = p.node_indices[1] - p.node_indices[0];
  for (std::size_t i = p.node_indices[1]; i + len < p.z.size(); ++i)
    CHECK(std::abs(apply_branches(m, {0}, p.z[i]) - p.z[i + len]) <= 1e-8);
}

TEST_CASE("tree paths land geometrically") {
  const ModelMap& m = testing::model();
  for (const char* w : {"|0", "|1", "|-2", "|1,-1", "|0,2", "|2,-1,0", "|1,1,-2"}) {
    const Itinerary it = parse_itinerary(w);
    const int per = static_cast<int>(it.period.size());
    const int depth = 12 * per;
    const TreePath p = tree_path(m, it, 32, depth);
    auto diameter = [&](int d) {
      const std::size_t from = p.node_indices[static_cast<std::size_t>(d)];
      double out = 0.0;
      for (std::size_t i = from; i < p.z.size(); ++i) out = std::max(out, std::abs(p.z[i] - p.z.back()));
      return out;
    };
    // least squares slope of log diameter against depth, sampled once per period
    std::vector<double> xs, ys;
    for (int d = per; d < depth; d += per) {
      const double dm = diameter(d);
      if (dm < 1e-12) break;  // rounding floor
      xs.push_back(d);
      ys.push_back(std::log(dm));
    }
    INFO(w);
    REQUIRE(xs.size() >= 3);
    const double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sx += xs[i];
      sy += ys[i];
      sxx += xs[i] * xs[i];
      sxy += xs[i] * ys[i];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    CHECK(std::exp(slope) < 1.0);
    CHECK(std::abs(p.z.back() - periodic_point(m, it)) < diameter(per));
  }
}

TEST_CASE("tree path rejects bad targets") {
  const ModelMap& m = testing::model();
  CHECK_THROWS_AS((void)tree_path(m, Itinerary::infinity(), 64), Error);
  CHECK_THROWS_AS((void)tree_path(m, parse_itinerary("0"), 2), Error);
}
