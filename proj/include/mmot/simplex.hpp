#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mmot/tensor.hpp"

namespace mmot {

struct TransportLpSolution {
  std::vector<double> x;                        // one entry per flat tuple
  std::vector<std::vector<double>> potentials;  // row duals regrouped per axis
  double objective = 0.0;
  std::size_t iterations = 0;
};

// Minimizes sum_t cost[t] x[t] over nonnegative m-way arrays with the given
// axis marginals, by a two-phase revised simplex using Bland's rule.
//
// One redundant row per axis beyond the first is dropped, so the constraint
// matrix has full row rank; the dropped rows get dual value zero. Entering
// variables are chosen by lowest flat index and ratio-test ties by lowest
// basic variable index, so results are reproducible run to run. The basis
// inverse is updated in product form and refactored periodically.
TransportLpSolution solve_transport_lp(const TensorShape& shape, std::span<const double> cost,
                                       const std::vector<std::vector<double>>& weights);

}  // namespace mmot
