#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "mmot/assignment.hpp"
#include "mmot/error.hpp"
#include "mmot/transport.hpp"
#include "support.hpp"

using namespace mmot;
using testing::column;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::InvalidArgument;
}

CostTensor random_cost(std::mt19937_64& rng, std::vector<Index> sizes) {
  TensorShape shape(std::move(sizes));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(shape.total());
  for (double& x : v) x = u(rng);
  return {shape, v};
}

std::vector<DiscreteMeasure> uniform_marginals(std::size_t m, Index n) {
  std::vector<DiscreteMeasure> out;
  for (std::size_t k = 0; k < m; ++k) {
    Points p(static_cast<Eigen::Index>(n), 1);
    for (Index i = 0; i < n; ++i) p(static_cast<Eigen::Index>(i), 0) = static_cast<double>(i);
    out.push_back(DiscreteMeasure::uniform(p));
  }
  return out;
}

// Oracle: minimum over every basic feasible solution of the transportation
// LP, found by enumerating column subsets of the full-rank constraint system.
double vertex_minimum(const CostTensor& cost, const std::vector<DiscreteMeasure>& marginals) {
  const auto& shape = cost.shape();
  const std::size_t m = shape.arity();
  const auto cols = static_cast<Eigen::Index>(shape.total());
  std::vector<std::pair<std::size_t, Index>> rows;
  for (std::size_t k = 0; k < m; ++k)
    for (Index i = 0; i < shape.size(k); ++i)
      if (k == 0 || i + 1 < shape.size(k)) rows.emplace_back(k, i);
  const auto r = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(r, cols);
  Eigen::VectorXd b(r);
  for (Eigen::Index row = 0; row < r; ++row) {
    const auto [k, i] = rows[static_cast<std::size_t>(row)];
    b[row] = marginals[k].weight(i);
    for (Eigen::Index f = 0; f < cols; ++f)
      if (shape.unflat(static_cast<std::uint64_t>(f))[k] == i) a(row, f) = 1.0;
  }
  double best = std::numeric_limits<double>::infinity();
  std::vector<Eigen::Index> pick(static_cast<std::size_t>(r));
  std::function<void(Eigen::Index, Eigen::Index)> rec = [&](Eigen::Index depth, Eigen::Index start) {
    if (depth == r) {
      Eigen::MatrixXd basis(r, r);
      for (Eigen::Index j = 0; j < r; ++j) basis.col(j) = a.col(pick[static_cast<std::size_t>(j)]);
      Eigen::FullPivLU<Eigen::MatrixXd> lu(basis);
      if (lu.rank() < r) return;
      const Eigen::VectorXd x = lu.solve(b);
      if (x.minCoeff() < -1e-12) return;
      double v = 0.0;
      for (Eigen::Index j = 0; j < r; ++j) v += x[j] * cost.at(static_cast<std::uint64_t>(pick[static_cast<std::size_t>(j)]));
      best = std::min(best, v);
      return;
    }
    for (Eigen::Index c = start; c <= cols - (r - depth); ++c) {
      pick[static_cast<std::size_t>(depth)] = c;
      rec(depth + 1, c + 1);
    }
  };
  rec(0, 0);
  return best;
}

// Oracle: best graph coupling (i, a(i), b(i)) over all permutation pairs.
double integral_minimum(const CostTensor& cost, Index n, std::size_t m) {
  const auto perms = testing::all_permutations(n);
  double best = std::numeric_limits<double>::infinity();
  if (m == 2) {
    for (const auto& p : perms) {
      double v = 0.0;
      for (Index i = 0; i < n; ++i) v += cost.at(IndexTuple{i, p[i]});
      best = std::min(best, v / static_cast<double>(n));
    }
  } else {
    for (const auto& p : perms)
      for (const auto& q : perms) {
        double v = 0.0;
        for (Index i = 0; i < n; ++i) v += cost.at(IndexTuple{i, p[i], q[i]});
        best = std::min(best, v / static_cast<double>(n));
      }
  }
  return best;
}

double dual_violation(const SolveResult& r, const CostTensor& cost) {
  double worst = -std::numeric_limits<double>::infinity();
  const double s = r.sense == Sense::Min ? 1.0 : -1.0;
  IndexTuple idx(cost.arity(), 0);
  do worst = std::max(worst, s * (r.dual.value_at(idx) - cost.at(idx)));
  while (next_tuple(idx, cost.shape().sizes()));
  return worst;
}

}  // namespace

TEST_CASE("solve_mm desk examples") {
  const auto mu = testing::uniform_1d({0, 1});
  const std::vector<DiscreteMeasure> two{mu, mu};
  const std::vector<Points> pts{mu.points(), mu.points()};
  const auto q = solve_mm(quadratic_cost(pts), two, Sense::Min);
  CHECK(q.primal_value == doctest::Approx(0.0));
  CHECK(q.plan.at(IndexTuple{0, 0}) == 0.5);
  CHECK(q.plan.at(IndexTuple{1, 1}) == 0.5);

  const CostTensor anti(TensorShape({2, 2}), {0, 1, 1, 0});
  for (bool assignment : {true, false}) {
    const auto r = solve_mm(anti, two, Sense::Min, {assignment});
    CHECK(r.primal_value == doctest::Approx(0.0));
    CHECK(r.plan.at(IndexTuple{0, 0}) == doctest::Approx(0.5));
    CHECK(r.gap <= 1e-12);
    CHECK(r.method == (assignment ? "assignment" : "simplex"));
  }
}

TEST_CASE("errors") {
  const auto mu = testing::uniform_1d({0, 1});
  const std::vector<DiscreteMeasure> two{mu, mu};
  const CostTensor c3(TensorShape({3, 3}), std::vector<double>(9, 0.0));
  CHECK(code_of([&] { solve_mm(c3, two, Sense::Min); }) == ErrorCode::DimensionMismatch);
  const auto lazy = CostTensor::lazy(TensorShape({200, 200, 200}), [](std::span<const Index>) { return 0.0; });
  std::vector<DiscreteMeasure> big;
  for (int k = 0; k < 3; ++k) big.push_back(DiscreteMeasure::uniform(Points::Zero(200, 1)));
  CHECK(code_of([&] { solve_mm(lazy, big, Sense::Min); }) == ErrorCode::SizeCapExceeded);
  CHECK(code_of([&] { solve_assignment(Eigen::MatrixXd::Zero(2, 3), Sense::Min); }) == ErrorCode::NonSquare);
  CHECK(code_of([&] { wasserstein2(mu, DiscreteMeasure::uniform(Points::Zero(1, 2))); }) ==
        ErrorCode::DimensionMismatch);
}

TEST_CASE("m = 3, n = 3 random cost: LP value equals the best vertex") {
  std::mt19937_64 rng(42);
  const auto ms = uniform_marginals(3, 3);
  for (int trial = 0; trial < 3; ++trial) {
    const auto c = random_cost(rng, {3, 3, 3});
    const auto r = solve_mm(c, ms, Sense::Min);
    CHECK(r.primal_value == doctest::Approx(vertex_minimum(c, ms)).epsilon(1e-9));
    CHECK(r.gap <= 1e-8);
    // Integral couplings are a subset, so their minimum can only be higher.
    CHECK(integral_minimum(c, 3, 3) >= r.primal_value - 1e-9);
  }
}

TEST_CASE("oracle equivalence for m = 2 and non-uniform weights") {
  std::mt19937_64 rng(8);
  for (Index n = 2; n <= 4; ++n) {
    const auto c = random_cost(rng, {n, n});
    const auto ms = uniform_marginals(2, n);
    const auto lp = solve_mm(c, ms, Sense::Min, {false});
    CHECK(lp.primal_value == doctest::Approx(integral_minimum(c, n, 2)).epsilon(1e-9));
    // Vertex integrality: entries in {0, 1/n}.
    for (std::uint64_t f = 0; f < c.shape().total(); ++f) {
      const double v = lp.plan.at(f);
      CHECK((std::abs(v) <= 1e-10 || std::abs(v - 1.0 / static_cast<double>(n)) <= 1e-10));
    }
  }
  for (int trial = 0; trial < 5; ++trial) {
    const auto mu = testing::random_measure(rng, 3, 1), nu = testing::random_measure(rng, 4, 1);
    const std::vector<DiscreteMeasure> ms{mu, nu};
    const auto c = random_cost(rng, {3, 4});
    const auto r = solve_mm(c, ms, Sense::Min);
    CHECK(r.primal_value == doctest::Approx(vertex_minimum(c, ms)).epsilon(1e-9));
    CHECK(max_marginal_error(r.plan, ms) <= 1e-9);
  }
}

TEST_CASE("strong duality, both senses") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t m = 2 + static_cast<std::size_t>(trial % 2);
    const Index n = 3 + static_cast<Index>(trial % 3);
    std::vector<DiscreteMeasure> ms;
    for (std::size_t k = 0; k < m; ++k) ms.push_back(testing::random_measure(rng, static_cast<Eigen::Index>(n), 1));
    const auto c = random_cost(rng, std::vector<Index>(m, n));
    for (Sense s : {Sense::Min, Sense::Max}) {
      const auto r = solve_mm(c, ms, s);
      CHECK(r.gap <= 1e-8);
      CHECK(dual_violation(r, c) <= 1e-9);
      CHECK(max_marginal_error(r.plan, ms) <= 1e-9);
      double w0 = 0.0;
      for (Index i = 0; i < n; ++i) w0 += ms[0].weight(i) * r.dual.u[0][i];
      CHECK(std::abs(w0) <= 1e-12);
    }
  }
}

TEST_CASE("solve_sym") {
  const auto mu = testing::uniform_1d({-1, 1});
  const std::vector<Points> pts{mu.points(), mu.points()};
  const SampledVectorField id(mu, mu.points()), neg(mu, -mu.points());
  const std::vector<SampledVectorField> fid{id}, fneg{neg};

  const auto a = solve_sym(vector_field_cost(fid, pts), mu, Sense::Max);
  CHECK(a.primal_value == doctest::Approx(1.0));
  CHECK(a.plan.at(IndexTuple{0, 0}) == doctest::Approx(0.5));

  const auto b = solve_sym(vector_field_cost(fneg, pts), mu, Sense::Max);
  CHECK(b.primal_value == doctest::Approx(1.0));
  CHECK(b.plan.at(IndexTuple{0, 1}) == doctest::Approx(0.5));

  const auto three = testing::uniform_1d({0, 1, 2});
  const CostTensor constant(TensorShape({3, 3, 3}), std::vector<double>(27, 2.5));
  CHECK(solve_sym(constant, three, Sense::Min).primal_value == doctest::Approx(2.5));

  // Symmetric plan and agreement with solve_mm on the symmetrized cost.
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 5; ++trial) {
    const auto c = random_cost(rng, {3, 3, 3});
    const auto r = solve_sym(c, three, Sense::Max);
    const auto shifted = cyclic_shift_plan(r.plan);
    for (std::uint64_t f = 0; f < 27; ++f) CHECK(std::abs(shifted.at(f) - r.plan.at(f)) <= 1e-12);
    const std::vector<DiscreteMeasure> ms(3, three);
    CHECK(r.primal_value == doctest::Approx(solve_mm(symmetrize_cost(c), ms, Sense::Max).primal_value).epsilon(1e-9));
  }
  CHECK(code_of([&] { solve_sym(CostTensor(TensorShape({2, 3}), std::vector<double>(6, 0.0)), mu, Sense::Min); }) ==
        ErrorCode::HeterogeneousSupports);
}

TEST_CASE("assignment") {
  Eigen::MatrixXd c = Eigen::MatrixXd::Ones(4, 4) - Eigen::MatrixXd::Identity(4, 4);
  const auto r = solve_assignment(c, Sense::Min);
  CHECK(r.perm == std::vector<Index>{0, 1, 2, 3});
  CHECK(r.value == 0.0);

  // 1-d quadratic: sorted matching, checked against all 3! permutations.
  const Eigen::Vector3d x(0.0, 1.0, 3.0), y(-1.0, 0.5, 4.0);
  Eigen::Matrix3d q;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) q(i, j) = std::pow(x[i] - y[j], 2);
  CHECK(solve_assignment(q, Sense::Min).perm == std::vector<Index>{0, 1, 2});

  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::MatrixXd m(5, 5);
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) m(i, j) = u(rng);
    for (Sense s : {Sense::Min, Sense::Max}) {
      const auto a = solve_assignment(m, s);
      double best = s == Sense::Min ? 1e300 : -1e300;
      for (const auto& p : testing::all_permutations(5)) {
        double v = 0.0;
        for (int i = 0; i < 5; ++i) v += m(i, static_cast<Eigen::Index>(p[static_cast<std::size_t>(i)]));
        best = s == Sense::Min ? std::min(best, v / 5) : std::max(best, v / 5);
      }
      CHECK(a.value == doctest::Approx(best).epsilon(1e-12));
      // Row-constant shift leaves the argmin alone.
      Eigen::MatrixXd shifted = m;
      for (int i = 0; i < 5; ++i) shifted.row(i).array() += 3.0 * i;
      CHECK(solve_assignment(shifted, s).perm == a.perm);
    }
  }
}

TEST_CASE("sinkhorn") {
  const auto mu = testing::uniform_1d({0, 1});
  const std::vector<DiscreteMeasure> two{mu, mu};
  const CostTensor anti(TensorShape({2, 2}), {0, 1, 1, 0});
  const auto s = sinkhorn_mm(anti, two, 1e-3, 1e-12, 1000);
  CHECK(s.converged);
  CHECK(std::abs(s.plan.at(IndexTuple{0, 0}) - 0.5) <= 1e-2);
  CHECK(std::abs(s.plan.at(IndexTuple{0, 1})) <= 1e-2);

  const auto three = testing::uniform_1d({0, 1, 2});
  std::mt19937_64 rng(2);
  Vector w(3);
  w << 0.2, 0.3, 0.5;
  const DiscreteMeasure skew(three.points(), w);
  const std::vector<DiscreteMeasure> ms{three, skew, three};
  const CostTensor flat(TensorShape({3, 3, 3}), std::vector<double>(27, 4.0));
  const auto p = sinkhorn_mm(flat, ms, 0.5, 1e-14, 50);
  const auto prod = product_plan(ms);
  for (std::uint64_t f = 0; f < 27; ++f) CHECK(p.plan.at(f) == doctest::Approx(prod.at(f)).epsilon(1e-14));

  // Shrinking epsilon approaches the LP value from above, within the entropic bound.
  for (int trial = 0; trial < 5; ++trial) {
    const auto c = random_cost(rng, {4, 4});
    const auto four = uniform_marginals(2, 4);
    const double exact = solve_mm(c, four, Sense::Min).primal_value;
    double prev = std::numeric_limits<double>::infinity();
    for (double eps : {1.0, 0.1, 0.01}) {
      // Fixed-epsilon scaling slows down sharply as epsilon shrinks.
      const auto r = sinkhorn_mm(c, four, eps, 1e-9, 20000);
      if (eps >= 0.1) CHECK(r.converged);
      CHECK(r.marginal_violation <= 1e-4);
      const double slack = r.marginal_violation * 1.0;  // costs lie in [0, 1]
      CHECK(r.value >= exact - slack - 1e-9);
      CHECK(r.value - exact <= r.entropic_bound + slack + 1e-9);
      CHECK(r.value <= prev + 1e-12);
      prev = r.value;
    }
  }
  CHECK(code_of([&] { sinkhorn_mm(anti, two, 0.0, 1e-9, 10); }) == ErrorCode::InvalidArgument);
  const auto capped = sinkhorn_mm(random_cost(rng, {4, 4}), uniform_marginals(2, 4), 1e-3, 0.0, 1);
  CHECK_FALSE(capped.converged);
  CHECK(capped.iterations == 1);
}

TEST_CASE("wasserstein2") {
  std::mt19937_64 rng(6);
  const auto mu = testing::random_measure(rng, 5, 2);
  CHECK(wasserstein2(mu, mu) == 0.0);
  const DiscreteMeasure a(column({1.5}), Vector::Ones(1)), b(column({-0.5}), Vector::Ones(1));
  CHECK(wasserstein2(a, b) == doctest::Approx(4.0));
  CHECK(wasserstein2(testing::uniform_1d({0, 1}), testing::uniform_1d({0, 2})) == doctest::Approx(0.5));
  CHECK(wasserstein2(mu, testing::random_measure(rng, 4, 2)) > 0.0);
}
