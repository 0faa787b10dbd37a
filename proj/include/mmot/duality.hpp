#pragma once

#include <optional>
#include <span>
#include <vector>

#include "mmot/costs.hpp"
#include "mmot/potentials.hpp"
#include "mmot/transport.hpp"

namespace mmot {

// Canonical optimal potentials: the minimum-Euclidean-norm point of the
// optimal dual face. Unique, so any symmetry of the instance is inherited.
// Falls back to the solver's own duals if the face projection cannot be
// verified. Throws NotExactSolve for inexact results.
DualPotentials extract_duals(const SolveResult& result, const CostTensor& cost);

// Largest violation of the dual constraint (positive = infeasible).
double dual_infeasibility(const DualPotentials& p, const CostTensor& cost);

// Replace u_i by its c-transform against the other potentials.
DualPotentials c_transform(const DualPotentials& p, std::size_t i, const CostTensor& cost);

struct SlackViolation {
  IndexTuple tuple;
  double mass = 0.0;
  double residual = 0.0;  // sum_k u_k - c
};

inline constexpr double kSupportMass = 1e-12;
inline constexpr double kSlackTol = 1e-8;

std::vector<SlackViolation> slackness_report(const CouplingPlan& plan, const DualPotentials& p,
                                             const CostTensor& cost);

struct MongeMaps {
  std::optional<std::vector<std::vector<Index>>> maps;  // T_1..T_{m-1}; empty when not a graph
  std::vector<IndexTuple> selected;                     // argmax tuple per axis-0 atom
  double concentration = 0.0;
  bool is_graph() const { return maps.has_value(); }
};

MongeMaps graph_test(const CouplingPlan& plan, double threshold);

struct GsPotentials {
  std::vector<std::vector<double>> phi;  // (m-1)/2 |x|^2 - u_i/2
  std::vector<std::vector<double>> f;    // |x|^2/2 + phi_i
  bool one_dimensional = false;
  // 1-d only: smallest second difference of each f_i over the sorted support.
  std::vector<double> min_second_difference;
  bool convex = true;
};

// Potentials are taken for the halved cost sum_{i<j} |x_i - x_j|^2 / 2, the
// normalisation under which f_0 has gradient x + sum_i T_i x.
GsPotentials gs_potential_maps(const DualPotentials& p, std::span<const Points> supports, const CostTensor& cost);

// 1-d: max |central difference of f_0 - (x + sum_i T_i x)| over interior
// atoms of the sorted axis-0 support.
double barycentric_residual(const GsPotentials& g, const Points& support0, const MongeMaps& maps,
                            std::span<const Points> supports);

DiscreteMeasure barycenter_measure(const CouplingPlan& plan, std::span<const Points> supports);

struct BarycenterProbe {
  double nu_value = 0.0;
  std::vector<double> candidate_values;
  std::vector<std::size_t> better;  // candidates beating nu by more than 1e-8
};

BarycenterProbe barycenter_optimality_probe(const DiscreteMeasure& nu, std::span<const DiscreteMeasure> marginals,
                                            std::span<const DiscreteMeasure> candidates);

struct Certificate {
  double primal = 0.0;
  double dual = 0.0;
  double gap = 0.0;
  double concentration = 0.0;
  std::vector<SlackViolation> violations;
};

Certificate certify(const SolveResult& result, const CostTensor& cost);

}  // namespace mmot
