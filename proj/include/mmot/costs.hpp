#pragma once

#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "mmot/measures.hpp"

namespace mmot {

enum class CostKind { Quadratic, VectorField, Symmetrized, Custom };

// m-way cost array. Dense at desk scale; larger instances carry an
// index -> value evaluator instead.
class CostTensor {
 public:
  using Evaluator = std::function<double(std::span<const Index>)>;

  CostTensor() = default;
  CostTensor(TensorShape shape, std::vector<double> values, CostKind kind = CostKind::Custom);
  static CostTensor lazy(TensorShape shape, Evaluator eval, CostKind kind = CostKind::Custom);

  const TensorShape& shape() const { return shape_; }
  std::size_t arity() const { return shape_.arity(); }
  CostKind kind() const { return kind_; }
  bool is_dense() const { return !values_.empty(); }
  const std::vector<double>& values() const { return values_; }

  double at(std::uint64_t flat) const;
  double at(std::span<const Index> idx) const;

  // <c, plan>
  double integrate(const CouplingPlan& plan) const;

  // Smallest and largest entry (dense scan or full evaluation).
  std::pair<double, double> range() const;

 private:
  TensorShape shape_;
  std::vector<double> values_;
  Evaluator eval_;
  CostKind kind_ = CostKind::Custom;
};

// Values u(x_i) attached to the atoms of a base measure.
class SampledVectorField {
 public:
  SampledVectorField(DiscreteMeasure base, Points values);

  const DiscreteMeasure& base() const { return base_; }
  const Points& values() const { return values_; }
  Index size() const { return base_.size(); }
  Eigen::VectorXd value(Index i) const { return values_.row(static_cast<Eigen::Index>(i)).transpose(); }

 private:
  DiscreteMeasure base_;
  Points values_;
};

// First pair (i, j), i < j, with bit-identical field values, if any.
std::optional<std::pair<Index, Index>> duplicate_values(const SampledVectorField& field);

CostTensor quadratic_cost(std::span<const Points> supports);

// c(i_0..i_{m-1}) = sum_k <u_k(x_{i_0}), y^{(k)}_{i_k}>, fields[k-1] = u_k.
CostTensor vector_field_cost(std::span<const SampledVectorField> fields, std::span<const Points> supports);

// (1/m) sum_k c(sigma^k x), constant on every sigma-orbit.
CostTensor symmetrize_cost(const CostTensor& cost);

// Block 3-cycle on R^{6d} viewed as three blocks of R^{2d}:
// (b_0, b_1, b_2) -> (b_1, b_2, b_0).
Eigen::VectorXd block_cycle(const Eigen::VectorXd& v, int times = 1);

struct GraphEmbedding {
  Points base;      // x_i, n x d
  Points embedded;  // P(x_i) = (x, x, u_1(x), 0, 0, u_2(x)), n x 6d

  // sigma^k_# of the embedded uniform measure.
  DiscreteMeasure marginal(int k) const;
};

GraphEmbedding embed_graph_m3(const SampledVectorField& u1, const SampledVectorField& u2);

struct ReductionCheck {
  double quadratic_objective = 0.0;  // C(plan), embedded quadratic cost
  double symmetric_objective = 0.0;  // D(plan), six-term inner-product objective
  double constant = 0.0;             // marginal-only second moments
  double residual = 0.0;             // |C + 2D - constant|
};

ReductionCheck reduction_identity(const SampledVectorField& u1, const SampledVectorField& u2,
                                  const CouplingPlan& plan);

double reduction_identity_residual(const SampledVectorField& u1, const SampledVectorField& u2,
                                   const CouplingPlan& plan);

}  // namespace mmot
