#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "mmot/tensor.hpp"

namespace mmot {

using Points = Eigen::MatrixXd;  // one point per row
using Vector = Eigen::VectorXd;

inline constexpr double kWeightSumTol = 1e-12;
inline constexpr double kPlanMassTol = 1e-10;
inline constexpr double kMarginalTol = 1e-9;

// Weighted point cloud. Validated once at construction and immutable after.
class DiscreteMeasure {
 public:
  DiscreteMeasure(Points points, Vector weights);

  static DiscreteMeasure uniform(Points points);

  // Throws EmptySupport, NegativeWeight, NonNormalized or DimensionMismatch.
  static void validate(const Points& points, const Vector& weights);

  Index size() const { return static_cast<Index>(weights_.size()); }
  Index dim() const { return static_cast<Index>(points_.cols()); }
  const Points& points() const { return points_; }
  const Vector& weights() const { return weights_; }
  Eigen::VectorXd point(Index i) const { return points_.row(static_cast<Eigen::Index>(i)).transpose(); }
  double weight(Index i) const { return weights_[static_cast<Eigen::Index>(i)]; }

  // All weights exactly equal to 1/n.
  bool is_uniform() const;

 private:
  Points points_;
  Vector weights_;
};

void validate(const DiscreteMeasure& measure);

// m-way nonnegative mass array. Dense storage while the index space fits in
// kDenseCap, otherwise a sorted entry list capped at kSparseEntryCap.
class CouplingPlan {
 public:
  static constexpr std::uint64_t kSparseEntryCap = 1'000'000;
  using Entry = std::pair<std::uint64_t, double>;

  CouplingPlan() = default;

  static CouplingPlan from_dense(TensorShape shape, std::vector<double> mass);
  // Duplicate flat indices are summed, zero entries dropped.
  static CouplingPlan from_entries(TensorShape shape, std::vector<Entry> entries);

  const TensorShape& shape() const { return shape_; }
  std::size_t arity() const { return shape_.arity(); }
  bool is_dense() const { return !dense_.empty(); }

  double at(std::uint64_t flat) const;
  double at(std::span<const Index> idx) const { return at(shape_.flat(idx)); }
  double total_mass() const;

  // Calls fn(flat, mass) for every entry with nonzero mass, in flat order.
  template <class Fn>
  void for_each(Fn&& fn) const {
    if (is_dense()) {
      for (std::uint64_t f = 0; f < dense_.size(); ++f)
        if (dense_[f] != 0.0) fn(f, dense_[f]);
    } else {
      for (const auto& [f, v] : sparse_) fn(f, v);
    }
  }

  std::vector<Entry> entries() const;
  std::size_t nonzeros() const;

  // Exact entrywise equality of the stored masses.
  bool operator==(const CouplingPlan& other) const;

 private:
  void check_masses() const;

  TensorShape shape_;
  std::vector<double> dense_;
  std::vector<Entry> sparse_;
};

// Sum of mass over every axis except `axis`.
std::vector<double> marginal(const CouplingPlan& plan, std::size_t axis);

// Largest |marginal_k - weights_k| over all axes and atoms.
double max_marginal_error(const CouplingPlan& plan, std::span<const DiscreteMeasure> marginals);

// sigma_# plan: mass at (i_0, ..., i_{m-1}) moves to (i_1, ..., i_{m-1}, i_0).
CouplingPlan cyclic_shift_plan(const CouplingPlan& plan);

// (1/m) sum_k sigma^k_# plan; the result is constant on every sigma-orbit.
CouplingPlan symmetrize_plan(const CouplingPlan& plan);

// Plan of x -> (x, T_1 x, ..., T_{m-1} x) pushed from `weights`.
CouplingPlan graph_plan(std::span<const double> weights,
                        const std::vector<std::vector<Index>>& maps,
                        const std::vector<Index>& axis_sizes);

// Product coupling of the given weight vectors.
CouplingPlan product_plan(std::span<const DiscreteMeasure> measures);

using PointMap = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

// Image measure under a point map; atoms landing on identical coordinates
// merge, in order of first appearance.
DiscreteMeasure pushforward(const DiscreteMeasure& measure, const PointMap& map);

// Image measure under an index map onto the same support.
DiscreteMeasure pushforward(const DiscreteMeasure& measure, std::span<const Index> index_map);

}  // namespace mmot
