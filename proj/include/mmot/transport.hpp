#pragma once

#include <span>
#include <string>
#include <vector>

#include "mmot/assignment.hpp"
#include "mmot/costs.hpp"
#include "mmot/potentials.hpp"

namespace mmot {

struct SolveOptions {
  // Route two uniform marginals of equal size to the assignment solver.
  bool allow_assignment = true;
};

struct SolveResult {
  CouplingPlan plan;
  double primal_value = 0.0;
  DualPotentials dual;  // as produced by the backend, u_0 normalized to zero mean
  double dual_value = 0.0;
  double gap = 0.0;
  std::size_t iterations = 0;
  Sense sense = Sense::Min;
  bool exact = true;
  std::string method;  // "simplex" or "assignment"
  std::vector<std::vector<double>> marginal_weights;
};

// Kantorovich problem over couplings of `marginals`.
SolveResult solve_mm(const CostTensor& cost, std::span<const DiscreteMeasure> marginals, Sense sense,
                     const SolveOptions& options = {});

// Symmetric problem: every marginal is `mu`; solved with the symmetrized
// cost and returned as the symmetrized optimal plan.
SolveResult solve_sym(const CostTensor& cost, const DiscreteMeasure& mu, Sense sense,
                      const SolveOptions& options = {});

struct SinkhornResult {
  CouplingPlan plan;
  double value = 0.0;               // <c, plan>
  double marginal_violation = 0.0;  // max over axes of the L1 marginal error
  std::size_t iterations = 0;
  bool converged = false;
  // |value - exact optimum| <= entropic_bound up to the marginal violation.
  double entropic_bound = 0.0;
  std::vector<std::vector<double>> potentials;
};

// Multi-marginal log-domain Sinkhorn with a fixed epsilon. On hitting
// max_iter the best iterate is returned with converged = false.
SinkhornResult sinkhorn_mm(const CostTensor& cost, std::span<const DiscreteMeasure> marginals, double epsilon,
                           double tol, std::size_t max_iter, Sense sense = Sense::Min);

// Optimal squared-distance transport value between mu and nu.
double wasserstein2(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

}  // namespace mmot
