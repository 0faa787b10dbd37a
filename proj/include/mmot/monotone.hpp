#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "mmot/costs.hpp"

namespace mmot {

// Pairs (x_k, p_k) on a graph, one per row.
struct GraphSample {
  Points x;
  Points p;

  GraphSample(Points x, Points p);
  static GraphSample of(const SampledVectorField& u);
  Index size() const { return static_cast<Index>(x.rows()); }
};

inline constexpr double kMonotoneTol = 1e-10;

struct PairCheck {
  bool ok = true;
  std::optional<std::pair<Index, Index>> worst;  // most violating pair when !ok
  double worst_value = 0.0;                      // smallest <x_i - x_j, p_i - p_j>
};

PairCheck is_monotone(const GraphSample& sample);

enum class CyclicMode { Exhaustive, Random };

struct CycleCheck {
  bool ok = true;
  std::vector<Index> worst_cycle;
  double worst_value = 0.0;
  std::uint64_t tuples = 0;
};

inline constexpr std::uint64_t kCyclicCap = 1'000'000;

// Sum over k of <p_{k+1}, x_{k+1} - x_k> around closed m-tuples.
CycleCheck is_m_cyclically_monotone(const GraphSample& sample, int m, CyclicMode mode = CyclicMode::Exhaustive,
                                    std::uint64_t trials = 10000, std::uint64_t seed = 0);

// max_k <p, y_k> + <q_k, x - y_k> over the sampled graph points (y_k, q_k).
double fitzpatrick(const GraphSample& sample, const Vector& p, const Vector& x);

// Values on a product grid, row-major (last axis fastest).
class GridFunction {
 public:
  GridFunction() = default;
  GridFunction(std::vector<std::vector<double>> axes, std::vector<double> values);

  const std::vector<std::vector<double>>& axes() const { return axes_; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }
  const TensorShape& shape() const { return shape_; }
  std::size_t dims() const { return axes_.size(); }
  double at(std::span<const Index> idx) const { return values_[shape_.flat(idx)]; }
  double max_spacing() const;

 private:
  std::vector<std::vector<double>> axes_;
  std::vector<double> values_;
  TensorShape shape_;
};

// Largest absolute forward difference quotient along any axis.
double lipschitz_estimate(const GridFunction& g);
// max spacing x Lipschitz estimate
double grid_tolerance(const GridFunction& g);

// Tabulates N on a grid whose axes are (p_1..p_d, x_1..x_d).
GridFunction fitzpatrick_grid(const GraphSample& sample, const std::vector<std::vector<double>>& axes);

// Node (p, x) receives N*(x, p) = sup over nodes (q, y) of <x, q> + <p, y> - N(q, y).
GridFunction conjugate_swapped(const GridFunction& n);

// L(p, x) = inf 1/2 N(p1, x1) + 1/2 N*(x2, p2) + |x1 - x2|^2/8 + |p1 - p2|^2/8
// over grid node pairs whose midpoint is (p, x).
GridFunction selfdual_interpolation(const GridFunction& n, const GridFunction& nstar);

struct SandwichCheck {
  bool ok = true;
  double tolerance = 0.0;
  double worst_lower = 0.0;  // min of L - N
  double worst_upper = 0.0;  // min of N* - L
};

SandwichCheck sandwich_check(const GridFunction& n, const GridFunction& l, const GridFunction& nstar);

// Sup over the contiguous axis block [first, first + count) of <y, p> - L(.., p, ..).
// `out_axes` gives the grids for y; defaults to the transformed axes.
GridFunction partial_legendre(const GridFunction& l, std::size_t first, std::size_t count,
                              const std::optional<std::vector<std::vector<double>>>& out_axes = std::nullopt);

// H(x, y) = (K(x, y) - K(y, x)) / 2 on a grid whose two halves coincide.
GridFunction antisymmetrize(const GridFunction& k);

struct EquivalenceReport {
  bool monotone = false;             // (1)
  bool involution_sup_zero = false;  // (2)
  bool identity_projection = false;  // (3)
  bool lp_diagonal = false;          // (4)
  double involution_sup = 0.0;       // max over S of (1/n) sum <u(x_i), x_{Si} - x_i>
  std::vector<Index> best_involution;
  double projection_gap = 0.0;  // identity residual - min residual
  double lp_value = 0.0;
  double diagonal_value = 0.0;
  std::optional<std::pair<Index, Index>> worst_pair;
  bool agree() const {
    return monotone == involution_sup_zero && monotone == identity_projection && monotone == lp_diagonal;
  }
};

inline constexpr Index kEquivalenceCap = 8;

EquivalenceReport monotone_equivalence_report(const SampledVectorField& u);

}  // namespace mmot
