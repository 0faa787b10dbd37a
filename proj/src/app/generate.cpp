#include "mmot/app/generate.hpp"

#include <algorithm>
#include <numeric>
#include <random>

namespace mmot::gen {

Points points(Rng& rng, Index n, Index d, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Points m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index k = 0; k < m.cols(); ++k) m(i, k) = u(rng);
  return m;
}

DiscreteMeasure measure(Rng& rng, Index n, Index d) {
  std::uniform_real_distribution<double> u(0.1, 1.0);
  Vector w(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = u(rng);
  w /= w.sum();
  w[w.size() - 1] = 1.0 - (w.sum() - w[w.size() - 1]);
  return {points(rng, n, d), w};
}

DiscreteMeasure uniform_measure(Rng& rng, Index n, Index d) { return DiscreteMeasure::uniform(points(rng, n, d)); }

SampledVectorField field(Rng& rng, const DiscreteMeasure& base) {
  return {base, points(rng, base.size(), base.dim())};
}

CostTensor cost(Rng& rng, const std::vector<Index>& sizes) {
  TensorShape shape(sizes);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(shape.total());
  for (double& x : v) x = u(rng);
  return {std::move(shape), std::move(v)};
}

std::vector<Index> permutation(Rng& rng, Index n) {
  std::vector<Index> p(n);
  std::iota(p.begin(), p.end(), Index{0});
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

CouplingPlan admissible_plan(Rng& rng, Index n) {
  std::uniform_int_distribution<int> parts(1, 4);
  std::uniform_real_distribution<double> w(0.05, 1.0);
  const int k = parts(rng);
  std::vector<double> lambda(static_cast<std::size_t>(k) + 1);
  for (double& l : lambda) l = w(rng);
  const double sum = std::accumulate(lambda.begin(), lambda.end(), 0.0);
  const TensorShape shape({n, n, n});
  std::vector<CouplingPlan::Entry> entries;
  const double nd = static_cast<double>(n);
  for (int j = 0; j < k; ++j) {
    const auto p = permutation(rng, n), q = permutation(rng, n);
    for (Index i = 0; i < n; ++i) {
      const std::vector<Index> t{i, p[i], q[i]};
      entries.emplace_back(shape.flat(t), lambda[static_cast<std::size_t>(j)] / sum / nd);
    }
  }
  // A product component keeps the support full.
  for (std::uint64_t f = 0; f < shape.total(); ++f) entries.emplace_back(f, lambda.back() / sum / (nd * nd * nd));
  return CouplingPlan::from_entries(shape, std::move(entries));
}

}  // namespace mmot::gen
