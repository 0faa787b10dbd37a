#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "mmot/measures.hpp"

namespace mmot {

enum class Sense { Min, Max };

std::string_view to_string(Sense sense);
Sense parse_sense(std::string_view text);

// One potential array per marginal. Min sense: sum_k u_k(x_k) <= c(x);
// max sense: sum_k u_k(x_k) >= c(x).
struct DualPotentials {
  std::vector<std::vector<double>> u;
  Sense sense = Sense::Min;

  std::size_t arity() const { return u.size(); }
  double value_at(std::span<const Index> idx) const;
  // sum_k integral of u_k against the k-th weights
  double objective(std::span<const DiscreteMeasure> marginals) const;
  double objective(const std::vector<std::vector<double>>& weights) const;
};

// Shift u_0 to zero weighted mean against `w0`, moving the constant into u_1.
void normalize_potentials(DualPotentials& p, std::span<const double> w0);

}  // namespace mmot
