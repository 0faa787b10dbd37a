#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mmot/costs.hpp"
#include "mmot/potentials.hpp"

namespace mmot {

using Permutation = std::vector<Index>;

// Permutation with perm^m = identity (every cycle length divides m).
struct MInvolution {
  Permutation perm;
  int m = 2;
};

inline constexpr Index kInvolutionEnumCap = 10;

bool is_permutation(std::span<const Index> perm);
bool is_m_involution(std::span<const Index> perm, int m);
Permutation inverse(std::span<const Index> perm);
// S^k as an index map.
Permutation power(std::span<const Index> perm, int k);
// Least m with perm^m = identity.
int permutation_order(std::span<const Index> perm);
std::vector<std::vector<Index>> cycles(std::span<const Index> perm);

// Visits every m-involution of {0..n-1} once, in lexicographic order of the
// permutation arrays (identity first). Throws CapExceeded for n > 10.
void for_each_m_involution(Index n, int m, const std::function<void(const Permutation&)>& fn);
std::vector<MInvolution> enumerate_m_involutions(Index n, int m);

// (I, S, ..., S^{m-1})_# of the uniform measure on n atoms.
CouplingPlan involution_plan(std::span<const Index> perm, int m);

// (1/n) sum_i sum_k <u_k(x_i), x_{S^k i}>; m = fields.size() + 1.
double involution_objective(std::span<const SampledVectorField> fields, const MInvolution& s);

enum class SearchMode { Exhaustive, Matching, LocalSearch };
SearchMode parse_search_mode(std::string_view text);
std::string_view to_string(SearchMode mode);

struct PolarResult {
  MInvolution s;
  Permutation assignment;  // discrete gradient map as an index map (polar_brenier)
  double objective = 0.0;
  double lp_bound = 0.0;
  double certificate_gap = 0.0;  // lp_bound - objective
  std::string note;
};

inline constexpr int kLocalSearchRestarts = 50;

PolarResult best_involution(std::span<const SampledVectorField> fields, int m, SearchMode mode,
                            std::uint64_t seed = 0);

struct Characterization {
  bool plan_symmetric = false;     // (a) graph plan of S is transpose invariant
  bool measure_involution = false;  // (b) S measure preserving and S o S = id
  bool antisymmetric_null = false;  // (c) sum_i H(S x_i, x_i) = 0 for the basis H
  bool agree() const { return plan_symmetric == measure_involution && measure_involution == antisymmetric_null; }
};

// `map` may be any index map into the support, not only a permutation.
Characterization characterization_check(std::span<const Index> map, const DiscreteMeasure& mu);

MInvolution swap_involution(Index i, Index j, Index n);

// u = T o S with T the optimal (cyclically monotone) assignment onto the field
// values and S measure preserving. assignment[i] = index k with T(x_i) = u(x_k).
PolarResult polar_brenier(const SampledVectorField& u);

struct HamiltonianResult {
  PolarResult polar;
  DualPotentials potentials;
  std::vector<double> graph_residuals;  // sum_k u_k - c~ on each tuple (i, Si, ...)
  double max_residual = 0.0;
  bool slackness_holds = false;
};

HamiltonianResult polar_hamiltonian(std::span<const SampledVectorField> fields, int m,
                                    SearchMode mode = SearchMode::Exhaustive, std::uint64_t seed = 0);

}  // namespace mmot
