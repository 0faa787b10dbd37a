#include "mmot/assignment.hpp"

#include <limits>
#include <string>

#include "mmot/error.hpp"

namespace mmot {

AssignmentResult solve_assignment(const Eigen::MatrixXd& cost, Sense sense) {
  if (cost.rows() != cost.cols())
    throw Error(ErrorCode::NonSquare,
                std::to_string(cost.rows()) + "x" + std::to_string(cost.cols()) + " cost matrix");
  if (cost.rows() == 0) throw Error(ErrorCode::EmptySupport, "empty cost matrix");
  if (!cost.allFinite()) throw Error(ErrorCode::NonFinite, "cost matrix entries must be finite");
  const Eigen::MatrixXd a = (sense == Sense::Min) ? cost : Eigen::MatrixXd(-cost);
  const std::size_t n = static_cast<std::size_t>(a.rows());
  constexpr double inf = std::numeric_limits<double>::infinity();

  // 1-based potentials; column 0 is a virtual start node.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = match[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = a(static_cast<Eigen::Index>(i0 - 1), static_cast<Eigen::Index>(j - 1)) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  AssignmentResult out;
  out.perm.assign(n, 0);
  for (std::size_t j = 1; j <= n; ++j) out.perm[match[j] - 1] = j - 1;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(out.perm[i]));
  out.value = total / static_cast<double>(n);
  const double s = (sense == Sense::Min) ? 1.0 : -1.0;
  out.row_potential.resize(n);
  out.col_potential.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.row_potential[i] = s * u[i + 1];
    out.col_potential[i] = s * v[i + 1];
  }
  return out;
}

}  // namespace mmot
