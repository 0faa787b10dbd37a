#pragma once

#include <cstdint>
#include <random>

#include "mmot/costs.hpp"
#include "mmot/measures.hpp"

namespace mmot::gen {

// Every random draw in scenarios and acceptance runs goes through this
// engine, seeded once per scenario or criterion.
using Rng = std::mt19937_64;

// Row-major draws, uniform on [lo, hi).
Points points(Rng& rng, Index n, Index d, double lo = -1.0, double hi = 1.0);
// Weights uniform on [0.1, 1) then normalized; the last weight absorbs rounding.
DiscreteMeasure measure(Rng& rng, Index n, Index d);
DiscreteMeasure uniform_measure(Rng& rng, Index n, Index d);
SampledVectorField field(Rng& rng, const DiscreteMeasure& base);
// Dense cost with entries uniform on [0, 1).
CostTensor cost(Rng& rng, const std::vector<Index>& sizes);
std::vector<Index> permutation(Rng& rng, Index n);
// Random 3-way plan with uniform marginals on n atoms: a convex mixture of up
// to four permutation graphs plus a product component.
CouplingPlan admissible_plan(Rng& rng, Index n);

}  // namespace mmot::gen
