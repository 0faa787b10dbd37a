#include <doctest.h>

#include <cmath>
#include <random>

#include "mmot/error.hpp"
#include "mmot/measures.hpp"
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
  return ErrorCode::InvalidArgument;  // sentinel: nothing thrown
}

CouplingPlan point_plan(std::vector<Index> sizes, IndexTuple at) {
  TensorShape shape(std::move(sizes));
  return CouplingPlan::from_entries(shape, {{shape.flat(at), 1.0}});
}

}  // namespace

TEST_CASE("tensor shape flattening round trips") {
  TensorShape s({2, 3, 4});
  CHECK(s.total() == 24);
  IndexTuple idx(3);
  for (std::uint64_t f = 0; f < s.total(); ++f) {
    s.unflat(f, idx);
    CHECK(s.flat(idx) == f);
  }
  CHECK(s.flat(std::vector<Index>{1, 2, 3}) == 23);
  TensorShape h({3, 3, 3});
  // (0,1,2) -> (1,2,0)
  CHECK(h.shifted(h.flat(std::vector<Index>{0, 1, 2})) == h.flat(std::vector<Index>{1, 2, 0}));
}

TEST_CASE("validate accepts and rejects per the invariants") {
  CHECK_NOTHROW(DiscreteMeasure(column({0.0}), Vector::Ones(1)));
  Vector bad(2);
  bad << 0.5, 0.6;
  CHECK(code_of([&] { DiscreteMeasure(column({0, 1}), bad); }) == ErrorCode::NonNormalized);
  bad << -0.1, 1.1;
  CHECK(code_of([&] { DiscreteMeasure(column({0, 1}), bad); }) == ErrorCode::NegativeWeight);
  CHECK(code_of([&] { DiscreteMeasure(Points(0, 1), Vector(0)); }) == ErrorCode::EmptySupport);
  Vector w3 = Vector::Constant(3, 1.0 / 3.0);
  CHECK(code_of([&] { DiscreteMeasure(column({0, 1}), w3); }) == ErrorCode::DimensionMismatch);
  // Off by 2e-12 is outside the tolerance, 5e-13 inside.
  Vector near(2);
  near << 0.5, 0.5 + 2e-12;
  CHECK(code_of([&] { DiscreteMeasure(column({0, 1}), near); }) == ErrorCode::NonNormalized);
  near << 0.5, 0.5 + 5e-13;
  CHECK_NOTHROW(DiscreteMeasure(column({0, 1}), near));
}

TEST_CASE("marginals of simple plans") {
  const auto diag = CouplingPlan::from_dense(TensorShape({2, 2}), {0.5, 0.0, 0.0, 0.5});
  CHECK(marginal(diag, 0) == std::vector<double>{0.5, 0.5});
  CHECK(code_of([&] { marginal(diag, 2); }) == ErrorCode::AxisOutOfRange);

  std::mt19937_64 rng(7);
  const auto mu = testing::random_measure(rng, 3, 1);
  const auto nu = testing::random_measure(rng, 4, 2);
  const std::vector<DiscreteMeasure> ms{mu, nu};
  const auto prod = product_plan(ms);
  const auto m1 = marginal(prod, 1);
  for (Index j = 0; j < 4; ++j) CHECK(m1[j] == doctest::Approx(nu.weight(j)).epsilon(1e-14));
}

TEST_CASE("random 3-way plan forced to uniform marginals") {
  // Average of random permutation-pair graph plans: marginals are exactly uniform.
  std::mt19937_64 rng(11);
  const Index n = 3;
  std::vector<CouplingPlan::Entry> entries;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> lambda(5);
  double total = 0.0;
  for (double& l : lambda) total += (l = u(rng));
  TensorShape shape({n, n, n});
  for (double l : lambda) {
    std::vector<Index> a{0, 1, 2}, b{0, 1, 2};
    std::shuffle(a.begin(), a.end(), rng);
    std::shuffle(b.begin(), b.end(), rng);
    for (Index i = 0; i < n; ++i)
      entries.push_back({shape.flat(std::vector<Index>{i, a[i], b[i]}), l / total / 3.0});
  }
  const auto plan = CouplingPlan::from_entries(shape, entries);
  for (std::size_t k = 0; k < 3; ++k)
    for (double v : marginal(plan, k)) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("cyclic shift moves mass and has order m") {
  const auto p = point_plan({2, 2}, {0, 1});
  CHECK(cyclic_shift_plan(p) == point_plan({2, 2}, {1, 0}));
  const auto diag = CouplingPlan::from_dense(TensorShape({2, 2}), {0.5, 0.0, 0.0, 0.5});
  CHECK(cyclic_shift_plan(diag) == diag);
  const auto q = point_plan({3, 3, 3}, {0, 1, 2});
  CHECK(cyclic_shift_plan(q) == point_plan({3, 3, 3}, {1, 2, 0}));
  CHECK(cyclic_shift_plan(cyclic_shift_plan(cyclic_shift_plan(q))) == q);
  CHECK(code_of([&] { cyclic_shift_plan(point_plan({2, 3}, {0, 0})); }) == ErrorCode::HeterogeneousSupports);

  // Bit-exact identity after m shifts on a random dense plan.
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> mass(64);
  double s = 0.0;
  for (double& v : mass) s += (v = u(rng));
  for (double& v : mass) v /= s;
  const auto r = CouplingPlan::from_dense(TensorShape({4, 4, 4}), mass);
  CHECK(cyclic_shift_plan(cyclic_shift_plan(cyclic_shift_plan(r))) == r);
}

TEST_CASE("symmetrize plan") {
  const auto s = symmetrize_plan(point_plan({2, 2}, {0, 1}));
  CHECK(s.at(std::vector<Index>{0, 1}) == 0.5);
  CHECK(s.at(std::vector<Index>{1, 0}) == 0.5);
  CHECK(symmetrize_plan(s) == s);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> mass(27);
  double total = 0.0;
  for (double& v : mass) total += (v = u(rng));
  for (double& v : mass) v /= total;
  const auto r = CouplingPlan::from_dense(TensorShape({3, 3, 3}), mass);
  const auto sym = symmetrize_plan(r);
  const auto shifted = cyclic_shift_plan(sym);
  for (std::uint64_t f = 0; f < 27; ++f) CHECK(std::abs(shifted.at(f) - sym.at(f)) <= 1e-14);
  const auto again = symmetrize_plan(sym);
  for (std::uint64_t f = 0; f < 27; ++f) CHECK(std::abs(again.at(f) - sym.at(f)) <= 1e-14);
  // Marginals of the average are the average of the marginals.
  for (std::size_t k = 0; k < 3; ++k) {
    std::vector<double> expect(3, 0.0);
    for (std::size_t j = 0; j < 3; ++j)
      for (Index i = 0; i < 3; ++i) expect[i] += marginal(r, j)[i] / 3.0;
    const auto got = marginal(sym, k);
    for (Index i = 0; i < 3; ++i) CHECK(got[i] == doctest::Approx(expect[i]).epsilon(1e-13));
  }
}

TEST_CASE("pushforward") {
  const auto mu = testing::uniform_1d({0.0, 1.0});
  const auto same = pushforward(mu, [](const Eigen::VectorXd& x) { return x; });
  CHECK(same.points() == mu.points());
  CHECK(same.weights() == mu.weights());

  const std::vector<Index> swap{1, 0};
  const auto sw = pushforward(mu, swap);
  CHECK(sw.weights() == mu.weights());

  Vector w(3);
  w << 0.2, 0.3, 0.5;
  const DiscreteMeasure three(column({0, 1, 2}), w);
  const auto merged = pushforward(three, [](const Eigen::VectorXd& x) {
    return Eigen::VectorXd::Constant(1, x[0] < 1.5 ? 0.0 : 1.0);
  });
  REQUIRE(merged.size() == 2);
  CHECK(merged.weight(0) == doctest::Approx(0.5));
  CHECK(merged.weight(1) == doctest::Approx(0.5));
  // Change of variables: int h d(T#mu) = int h o T dmu with h(y) = y^2 + 1.
  double lhs = 0.0, rhs = 0.0;
  for (Index i = 0; i < merged.size(); ++i) lhs += merged.weight(i) * (std::pow(merged.point(i)[0], 2) + 1.0);
  for (Index i = 0; i < 3; ++i) rhs += three.weight(i) * (std::pow(three.point(i)[0] < 1.5 ? 0.0 : 1.0, 2) + 1.0);
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-15));

  const std::vector<Index> bad{0, 3, 1};
  CHECK(code_of([&] { pushforward(three, bad); }) == ErrorCode::MapOutOfRange);
}

TEST_CASE("plan construction errors") {
  CHECK(code_of([] { CouplingPlan::from_dense(TensorShape({2}), {0.7, 0.7}); }) == ErrorCode::NonNormalized);
  CHECK(code_of([] { CouplingPlan::from_dense(TensorShape({2}), {1.5, -0.5}); }) == ErrorCode::NegativeWeight);
  // Sparse storage beyond the dense cap.
  TensorShape big({200, 200, 200});
  const auto sparse = CouplingPlan::from_entries(big, {{5, 0.25}, {5, 0.25}, {7'999'999, 0.5}});
  CHECK_FALSE(sparse.is_dense());
  CHECK(sparse.nonzeros() == 2);
  CHECK(sparse.at(5) == 0.5);
}
