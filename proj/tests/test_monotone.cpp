#include <doctest.h>

#include <cmath>
#include <random>

#include "mmot/error.hpp"
#include "mmot/monotone.hpp"
#include "support.hpp"

using namespace mmot;
using testing::column;

namespace {

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = a + (b - a) * i / (n - 1);
  return v;
}

GridFunction tabulate_1d(const std::vector<double>& axis, double (*f)(double)) {
  std::vector<double> vals;
  for (double p : axis) vals.push_back(f(p));
  return {{axis}, vals};
}

Points rotate(const Points& x) {
  Points r(x.rows(), 2);
  r.col(0) = -x.col(1);
  r.col(1) = x.col(0);
  return r;
}

}  // namespace

TEST_CASE("pairwise monotonicity") {
  const auto x = column({0, 1, 2, 3});
  CHECK(is_monotone(GraphSample(x, 2.0 * x)).ok);
  CHECK(is_monotone(GraphSample(x, column({0, 0, 0, 0}))).ok);
  const auto bad = is_monotone(GraphSample(x, column({0, 2, 1, 3})));
  CHECK_FALSE(bad.ok);
  REQUIRE(bad.worst.has_value());
  CHECK(*bad.worst == std::pair<Index, Index>{1, 2});
  CHECK(bad.worst_value == doctest::Approx(-1.0));
  CHECK(is_monotone(GraphSample(column({5}), column({-1}))).ok);

  CHECK_THROWS_AS(GraphSample(Points(0, 1), Points(0, 1)), Error);
  CHECK_THROWS_AS(GraphSample(column({1, 2}), column({1})), Error);
  CHECK_THROWS_AS(GraphSample(column({1, NAN}), column({1, 2})), Error);
}

TEST_CASE("cyclic monotonicity") {
  std::mt19937_64 rng(2);
  // Gradient of a convex quadratic: cyclically monotone of every order.
  const Points x = testing::random_points(rng, 6, 2);
  Eigen::Matrix2d a;
  a << 2.0, 0.5, 0.5, 1.0;
  const GraphSample grad(x, x * a);
  for (int m = 1; m <= 5; ++m) CHECK(is_m_cyclically_monotone(grad, m).ok);

  // A rotation is monotone (pairs give zero) but fails at order 3.
  Points tri(3, 2);
  tri << 1, 0, -0.5, std::sqrt(3.0) / 2, -0.5, -std::sqrt(3.0) / 2;
  const GraphSample rot(tri, rotate(tri));
  CHECK(is_monotone(rot).ok);
  CHECK(is_m_cyclically_monotone(rot, 2).ok);
  const auto c3 = is_m_cyclically_monotone(rot, 3);
  CHECK_FALSE(c3.ok);
  CHECK(c3.worst_cycle.size() == 3);
  CHECK(c3.tuples == 27);

  // Oracle: direct cycle sum for the reported worst cycle.
  double direct = 0.0;
  for (std::size_t k = 0; k < 3; ++k) {
    const auto a0 = static_cast<Eigen::Index>(c3.worst_cycle[k]);
    const auto a1 = static_cast<Eigen::Index>(c3.worst_cycle[(k + 1) % 3]);
    direct += rot.p.row(a1).dot(rot.x.row(a1) - rot.x.row(a0));
  }
  CHECK(direct == doctest::Approx(c3.worst_value));

  const auto rnd = is_m_cyclically_monotone(rot, 3, CyclicMode::Random, 500, 7);
  CHECK(rnd.tuples == 500);
  CHECK_FALSE(rnd.ok);
  CHECK(is_m_cyclically_monotone(rot, 3, CyclicMode::Random, 500, 7).worst_cycle == rnd.worst_cycle);

  const GraphSample big(testing::random_points(rng, 40, 1), testing::random_points(rng, 40, 1));
  CHECK_THROWS_AS(is_m_cyclically_monotone(big, 4), Error);
  CHECK_THROWS_AS(is_m_cyclically_monotone(big, 0), Error);
}

TEST_CASE("Fitzpatrick function") {
  const auto x = column({-1, 0, 1});
  const GraphSample g(x, x);  // identity graph
  Vector p(1), y(1);
  // On the graph, N(x, x) = x^2 for a monotone sample.
  for (double t : {-1.0, 0.0, 1.0}) {
    p << t;
    y << t;
    CHECK(fitzpatrick(g, p, y) == doctest::Approx(t * t));
  }
  // Off the graph: max over k of p*y_k + y_k*(x - y_k).
  p << 0.5;
  y << 2.0;
  double oracle = -1e300;
  for (double yk : {-1.0, 0.0, 1.0}) oracle = std::max(oracle, 0.5 * yk + yk * (2.0 - yk));
  CHECK(fitzpatrick(g, p, y) == doctest::Approx(oracle));
  // Max of affine pieces, so convex along any segment.
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int i = 0; i < 200; ++i) {
    Vector p0(1), x0(1), p1(1), x1(1);
    p0 << u(rng);
    x0 << u(rng);
    p1 << u(rng);
    x1 << u(rng);
    const double t = 0.5 * (u(rng) + 2.0) / 2.0;
    const double mid = fitzpatrick(g, (1 - t) * p0 + t * p1, (1 - t) * x0 + t * x1);
    CHECK(mid <= (1 - t) * fitzpatrick(g, p0, x0) + t * fitzpatrick(g, p1, x1) + 1e-12);
  }
  Vector wrong(2);
  wrong << 1, 2;
  CHECK_THROWS_AS(fitzpatrick(g, wrong, y), Error);
}

TEST_CASE("grid functions") {
  CHECK_THROWS_AS(GridFunction({}, {}), Error);
  CHECK_THROWS_AS(GridFunction({{0, 0}}, {1, 2}), Error);
  CHECK_THROWS_AS(GridFunction({{0, 1}}, {1}), Error);
  CHECK_THROWS_AS(GridFunction({{0, INFINITY}}, {1, 2}), Error);
  const GridFunction g({{0, 1, 3}, {0, 2}}, {0, 1, 2, 3, 4, 5});
  const std::vector<Index> idx{2, 1};
  CHECK(g.at(idx) == 5.0);
  CHECK(g.max_spacing() == 2.0);
  CHECK(lipschitz_estimate(g) == doctest::Approx(2.0));  // (2 - 0)/1 along axis 0
  CHECK(grid_tolerance(g) == doctest::Approx(4.0));
}

TEST_CASE("self-dual sandwich on a 101-node grid") {
  const auto axis = linspace(-2.0, 2.0, 101);
  for (int which = 0; which < 3; ++which) {
    Points x, p;
    if (which == 0) {
      x = column({-1, -0.3, 0.4, 1});
      p = 2.0 * x;
    } else if (which == 1) {
      x = column({-1, 0, 1});
      p = column({-1, -1, 1});  // sign-like, monotone with a flat piece
    } else {
      x = column({-0.5, 0.5});
      p = column({0, 0});
    }
    const GraphSample g(x, p);
    REQUIRE(is_monotone(g).ok);
    const auto n = fitzpatrick_grid(g, {axis, axis});
    const auto ns = conjugate_swapped(n);
    const auto l = selfdual_interpolation(n, ns);
    const auto s = sandwich_check(n, l, ns);
    CHECK(s.ok);
    CHECK(s.tolerance > 0.0);
    CHECK(s.tolerance < 0.5);
    MESSAGE("sample " << which << ": worst lower " << s.worst_lower << ", worst upper " << s.worst_upper
                      << ", tolerance " << s.tolerance);
  }
  CHECK_THROWS_AS(fitzpatrick_grid(GraphSample(column({0}), column({0})), {axis}), Error);
  const GridFunction other({axis, linspace(-1, 1, 101)}, std::vector<double>(101 * 101, 0.0));
  const GridFunction zero({axis, axis}, std::vector<double>(101 * 101, 0.0));
  CHECK_THROWS_AS(selfdual_interpolation(zero, other), Error);
}

TEST_CASE("partial Legendre transform") {
  const auto axis = linspace(-2.0, 2.0, 81);
  const auto half = tabulate_1d(axis, [](double t) { return 0.5 * t * t; });
  const auto conj = partial_legendre(half, 0, 1);
  for (std::size_t i = 0; i < axis.size(); ++i)
    if (std::abs(axis[i]) <= 2.0) CHECK(conj.values()[i] == doctest::Approx(0.5 * axis[i] * axis[i]).epsilon(1e-12));

  const auto box = linspace(-1.0, 1.0, 41);
  const GridFunction zero({box}, std::vector<double>(box.size(), 0.0));
  const auto abs_y = partial_legendre(zero, 0, 1, std::vector<std::vector<double>>{axis});
  for (std::size_t i = 0; i < axis.size(); ++i) CHECK(abs_y.values()[i] == doctest::Approx(std::abs(axis[i])));

  // A convex table returns to itself under the double transform.
  const auto cosh_grid = tabulate_1d(box, [](double t) { return std::cosh(t); });
  const auto twice = partial_legendre(partial_legendre(cosh_grid, 0, 1, std::vector<std::vector<double>>{linspace(-1.5, 1.5, 301)}), 0, 1,
                                      std::vector<std::vector<double>>{box});
  double worst = 0.0;
  for (std::size_t i = 0; i < box.size(); ++i) worst = std::max(worst, std::abs(twice.values()[i] - cosh_grid.values()[i]));
  CHECK(worst <= 1e-2);

  // Partial transform on the second axis only of l(a, b) = a + b^2/2.
  std::vector<double> vals;
  for (double a : box)
    for (double b : axis) vals.push_back(a + 0.5 * b * b);
  const GridFunction two({box, axis}, vals);
  const auto part = partial_legendre(two, 1, 1);
  const std::vector<Index> at{3, 40};  // a = box[3], y = 0
  CHECK(part.at(at) == doctest::Approx(-box[3]));
  CHECK_THROWS_AS(partial_legendre(two, 1, 2), Error);
  CHECK_THROWS_AS(partial_legendre(two, 0, 0), Error);
}

TEST_CASE("antisymmetrization") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-1, 1);
  const auto axis = linspace(-1, 1, 9);
  std::vector<double> vals(81);
  for (double& v : vals) v = u(rng);
  const GridFunction k({axis, axis}, vals);
  const auto h = antisymmetrize(k);
  for (Index i = 0; i < 9; ++i)
    for (Index j = 0; j < 9; ++j) {
      const std::vector<Index> a{i, j}, b{j, i};
      CHECK(h.at(a) == -h.at(b));  // bit-exact
      CHECK(h.at(a) == 0.5 * (k.at(a) - k.at(b)));
    }
  std::vector<double> sym(81);
  for (Index i = 0; i < 9; ++i)
    for (Index j = 0; j < 9; ++j) sym[i * 9 + j] = axis[i] * axis[j] + axis[i] + axis[j];
  const auto hs = antisymmetrize(GridFunction({axis, axis}, sym));
  for (double v : hs.values()) CHECK(v == 0.0);

  CHECK_THROWS_AS(antisymmetrize(GridFunction({axis}, std::vector<double>(9, 0.0))), Error);
  CHECK_THROWS_AS(antisymmetrize(GridFunction({axis, linspace(0, 1, 9)}, vals)), Error);
}

TEST_CASE("four equivalent monotonicity tests") {
  const auto five = testing::uniform_1d({-2, -1, 0, 1, 2});
  const auto up = monotone_equivalence_report(SampledVectorField(five, 2.0 * five.points()));
  CHECK((up.monotone && up.involution_sup_zero && up.identity_projection && up.lp_diagonal));
  CHECK(up.involution_sup == doctest::Approx(0.0));
  CHECK(up.best_involution == std::vector<Index>{0, 1, 2, 3, 4});

  const auto two = testing::uniform_1d({-1, 1});
  const auto down = monotone_equivalence_report(SampledVectorField(two, -two.points()));
  CHECK_FALSE((down.monotone || down.involution_sup_zero || down.identity_projection || down.lp_diagonal));
  CHECK(down.involution_sup == doctest::Approx(2.0));
  CHECK(down.best_involution == std::vector<Index>{1, 0});
  CHECK(down.lp_value == doctest::Approx(1.0));
  CHECK(down.diagonal_value == doctest::Approx(-1.0));

  Points sq(4, 2);
  sq << 1, 0, 0, 1, -1, 0, 0, -1;
  const auto rot = monotone_equivalence_report(SampledVectorField(DiscreteMeasure::uniform(sq), rotate(sq)));
  CHECK(rot.agree());
  CHECK(rot.monotone);

  std::mt19937_64 rng(12);
  int mono = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const Eigen::Index n = 2 + trial % 5;
    const auto mu = DiscreteMeasure::uniform(testing::random_points(rng, n, 1 + trial % 2));
    // Mix a monotone part with noise of varying size.
    const double noise = (trial % 3) * 0.3;
    const SampledVectorField u(mu, mu.points() + noise * testing::random_points(rng, n, mu.points().cols()));
    const auto r = monotone_equivalence_report(u);
    CHECK(r.agree());
    CHECK(r.involution_sup >= -1e-12);
    CHECK(r.lp_value >= r.diagonal_value - 1e-9);
    mono += r.monotone;
  }
  CHECK(mono > 0);
  CHECK(mono < 60);

  CHECK_THROWS_AS(monotone_equivalence_report(SampledVectorField(DiscreteMeasure::uniform(testing::random_points(rng, 9, 1)),
                                                                  testing::random_points(rng, 9, 1))),
                  Error);
}

TEST_CASE("cyclic monotonicity across orders") {
  std::mt19937_64 rng(31);
  int failures_seen = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const Eigen::Index n = 3 + trial % 3;
    const Points x = testing::random_points(rng, n, 2);
    // Rotation plus a random symmetric part: sometimes monotone, rarely cyclic.
    Eigen::Matrix2d a;
    a << 0.3 * (trial % 4), -1.0, 1.0, 0.3 * (trial % 4);
    const GraphSample g(x, x * a.transpose() + 0.2 * testing::random_points(rng, n, 2));
    for (int m = 2; m <= 3; ++m) {
      const bool ok = is_m_cyclically_monotone(g, m).ok;
      if (ok) CHECK(is_monotone(g).ok);
      if (!ok) {
        ++failures_seen;
        CHECK_FALSE(is_m_cyclically_monotone(g, 2 * m).ok);
      }
    }
  }
  CHECK(failures_seen > 0);
}

TEST_CASE("Fitzpatrick function of a dense identity sample") {
  Points x(201, 1);
  for (Eigen::Index i = 0; i < 201; ++i) x(i, 0) = -1.0 + 0.01 * static_cast<double>(i);
  const GraphSample g(x, x);
  Vector p(1), y(1);
  for (double a = -1.0; a <= 1.0; a += 0.125)
    for (double b = -1.0; b <= 1.0; b += 0.125) {
      p << a;
      y << b;
      // Discrete sup misses the continuous one by at most (h/2)^2.
      const double exact = 0.25 * (a + b) * (a + b);
      CHECK(fitzpatrick(g, p, y) <= exact + 1e-12);
      CHECK(fitzpatrick(g, p, y) >= exact - 0.25 * 0.01 * 0.01 - 1e-12);
    }
}

TEST_CASE("antisymmetrization of x y^2") {
  const auto axis = linspace(-1, 1, 11);
  std::vector<double> vals;
  for (double a : axis)
    for (double b : axis) vals.push_back(a * b * b);
  const auto h = antisymmetrize(GridFunction({axis, axis}, vals));
  for (Index i = 0; i < 11; ++i)
    for (Index j = 0; j < 11; ++j) {
      const std::vector<Index> idx{i, j};
      const double a = axis[i], b = axis[j];
      CHECK(h.at(idx) == doctest::Approx(0.5 * (a * b * b - b * a * a)).epsilon(1e-14));
      if (i == j) CHECK(h.at(idx) == 0.0);
    }
}
