#pragma once

#include <Eigen/Dense>
#include <vector>

#include "mmot/potentials.hpp"

namespace mmot {

struct AssignmentResult {
  std::vector<Index> perm;  // row i is matched to column perm[i]
  double value = 0.0;       // (1/n) sum_i cost(i, perm[i])
  // Feasible dual pair for the uniform-marginal LP, tight on the matching:
  // row[i] + col[j] <= cost(i, j) for min, >= for max.
  std::vector<double> row_potential;
  std::vector<double> col_potential;
};

// O(n^3) shortest augmenting path (Hungarian) method.
AssignmentResult solve_assignment(const Eigen::MatrixXd& cost, Sense sense);

}  // namespace mmot
