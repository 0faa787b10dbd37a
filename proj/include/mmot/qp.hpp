#pragma once

#include <Eigen/Dense>
#include <optional>

namespace mmot {

// Minimum-norm point of a polyhedron:
//   minimize 0.5 |x|^2  s.t.  eq_rows x = eq_rhs,  in_rows x >= in_rhs.
// Dual active-set method (Goldfarb-Idnani) specialised to an identity
// Hessian; projections are recomputed from the active normals each step,
// which is cheap at the sizes this is used for. Returns nullopt when the
// constraints are inconsistent or the iteration cap is hit.
std::optional<Eigen::VectorXd> min_norm_point(const Eigen::MatrixXd& eq_rows, const Eigen::VectorXd& eq_rhs,
                                              const Eigen::MatrixXd& in_rows, const Eigen::VectorXd& in_rhs,
                                              double tol = 1e-11);

}  // namespace mmot
