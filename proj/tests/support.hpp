#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

#include "mmot/costs.hpp"
#include "mmot/measures.hpp"

namespace testing {

inline Eigen::MatrixXd column(std::initializer_list<double> xs) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(xs.size()), 1);
  Eigen::Index i = 0;
  for (double x : xs) m(i++, 0) = x;
  return m;
}

inline mmot::DiscreteMeasure uniform_1d(std::initializer_list<double> xs) {
  return mmot::DiscreteMeasure::uniform(column(xs));
}

inline Eigen::MatrixXd random_points(std::mt19937_64& rng, Eigen::Index n, Eigen::Index d, double lo = -1.0,
                                     double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::MatrixXd m(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = u(rng);
  return m;
}

inline mmot::DiscreteMeasure random_measure(std::mt19937_64& rng, Eigen::Index n, Eigen::Index d) {
  std::uniform_real_distribution<double> u(0.1, 1.0);
  Eigen::VectorXd w(n);
  for (Eigen::Index i = 0; i < n; ++i) w[i] = u(rng);
  w /= w.sum();
  // Nudge the last weight so the sum is 1 to the last bit.
  w[n - 1] = 1.0 - (w.sum() - w[n - 1]);
  return {random_points(rng, n, d), w};
}

inline mmot::SampledVectorField random_field(std::mt19937_64& rng, const mmot::DiscreteMeasure& base) {
  return {base, random_points(rng, static_cast<Eigen::Index>(base.size()), static_cast<Eigen::Index>(base.dim()))};
}

// Every permutation of {0..n-1}, in lexicographic order.
inline std::vector<std::vector<std::size_t>> all_permutations(std::size_t n) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), std::size_t{0});
  std::vector<std::vector<std::size_t>> out;
  do out.push_back(p);
  while (std::next_permutation(p.begin(), p.end()));
  return out;
}

}  // namespace testing
