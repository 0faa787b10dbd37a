#include "mmot/involution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <string>

#include "mmot/assignment.hpp"
#include "mmot/duality.hpp"
#include "mmot/error.hpp"
#include "mmot/transport.hpp"

namespace mmot {

namespace {

constexpr Index kNone = std::numeric_limits<Index>::max();
constexpr double kImprove = 1e-12;

void check_fields(std::span<const SampledVectorField> fields, int m) {
  if (m < 2) throw Error(ErrorCode::InvalidArgument, "m must be at least 2");
  if (fields.size() + 1 != static_cast<std::size_t>(m))
    throw Error(ErrorCode::DimensionMismatch,
                "m = " + std::to_string(m) + " needs " + std::to_string(m - 1) + " fields, got " +
                    std::to_string(fields.size()));
  const auto& base = fields[0].base();
  if (!base.is_uniform()) throw Error(ErrorCode::NonUniformWeights, "involution search needs uniform weights");
  for (const auto& u : fields) {
    if (u.base().points() != base.points() || u.base().weights() != base.weights())
      throw Error(ErrorCode::BaseMismatch, "fields are sampled on different base measures");
    if (u.values().cols() != base.points().cols())
      throw Error(ErrorCode::DimensionMismatch, "field values and base points differ in dimension");
  }
}

// W[k-1](i, j) = <u_k(x_i), x_j>
std::vector<Eigen::MatrixXd> pairing_tables(std::span<const SampledVectorField> fields) {
  std::vector<Eigen::MatrixXd> w;
  for (const auto& u : fields) w.push_back(u.values() * u.base().points().transpose());
  return w;
}

double orbit_score(const std::vector<Eigen::MatrixXd>& w, std::span<const Index> perm, std::span<const Index> elems) {
  double s = 0.0;
  for (Index i : elems) {
    Index j = i;
    for (const auto& wk : w) {
      j = perm[j];
      s += wk(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  return s;
}

std::vector<Index> all_indices(Index n) {
  std::vector<Index> v(n);
  std::iota(v.begin(), v.end(), Index{0});
  return v;
}

CostTensor field_cost(std::span<const SampledVectorField> fields) {
  const std::vector<Points> supports(fields.size() + 1, fields[0].base().points());
  return vector_field_cost(fields, supports);
}

class LocalSearch {
 public:
  LocalSearch(const std::vector<Eigen::MatrixXd>& w, int m) : w_(w), m_(m) {}

  // Repeatedly dissolve a pair of cycles and rebuild their elements as the
  // best m-involution on that subset, until no pair improves.
  void polish(Permutation& perm) {
    for (std::size_t sweep = 0; sweep < 100000; ++sweep) {
      const auto cyc = cycles(perm);
      bool improved = false;
      for (std::size_t a = 0; a < cyc.size() && !improved; ++a)
        for (std::size_t b = a; b < cyc.size() && !improved; ++b) {
          std::vector<Index> elems = cyc[a];
          if (b != a) elems.insert(elems.end(), cyc[b].begin(), cyc[b].end());
          std::sort(elems.begin(), elems.end());
          improved = rebuild(perm, elems);
        }
      if (!improved) return;
    }
  }

 private:
  bool rebuild(Permutation& perm, const std::vector<Index>& elems) {
    const double current = orbit_score(w_, perm, elems);
    const auto& local = subset_involutions(elems.size());
    Permutation trial = perm;
    double best = current;
    const Permutation* pick = nullptr;
    for (const auto& q : local) {
      for (std::size_t a = 0; a < elems.size(); ++a) trial[elems[a]] = elems[q[a]];
      const double s = orbit_score(w_, trial, elems);
      if (s > best + kImprove) {
        best = s;
        pick = &q;
      }
    }
    if (!pick) return false;
    for (std::size_t a = 0; a < elems.size(); ++a) perm[elems[a]] = elems[(*pick)[a]];
    return true;
  }

  const std::vector<Permutation>& subset_involutions(std::size_t s) {
    auto it = cache_.find(s);
    if (it != cache_.end()) return it->second;
    std::vector<Permutation> all;
    for_each_m_involution(s, m_, [&](const Permutation& p) { all.push_back(p); });
    return cache_.emplace(s, std::move(all)).first->second;
  }

  const std::vector<Eigen::MatrixXd>& w_;
  int m_;
  std::map<std::size_t, std::vector<Permutation>> cache_;
};

Permutation random_m_involution(Index n, int m, std::mt19937_64& rng) {
  std::vector<Index> order = all_indices(n);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<Index> divisors;
  for (int d = 1; d <= m; ++d)
    if (m % d == 0) divisors.push_back(static_cast<Index>(d));
  Permutation perm(n);
  Index pos = 0;
  while (pos < n) {
    std::vector<Index> fit;
    for (Index d : divisors)
      if (pos + d <= n) fit.push_back(d);
    const Index d = fit[std::uniform_int_distribution<std::size_t>(0, fit.size() - 1)(rng)];
    for (Index k = 0; k < d; ++k) perm[order[pos + k]] = order[pos + (k + 1) % d];
    pos += d;
  }
  return perm;
}

// Greedy orbit rounding of an optimal symmetric plan: heaviest tuples first,
// each accepted as a cycle when it is a periodic orbit on unused atoms.
Permutation round_plan(const CouplingPlan& plan, int m) {
  const Index n = plan.shape().size(0);
  auto entries = plan.entries();
  std::stable_sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  Permutation perm(n, kNone);
  for (const auto& [flat, mass] : entries) {
    const auto t = plan.shape().unflat(flat);
    std::size_t period = static_cast<std::size_t>(m);
    for (std::size_t d = 1; d < static_cast<std::size_t>(m); ++d) {
      if (m % static_cast<int>(d) != 0) continue;
      bool periodic = true;
      for (std::size_t k = d; k < t.size() && periodic; ++k) periodic = t[k] == t[k - d];
      if (periodic) {
        period = d;
        break;
      }
    }
    std::vector<Index> cyc(t.begin(), t.begin() + static_cast<std::ptrdiff_t>(period));
    auto sorted = cyc;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) continue;
    if (std::any_of(cyc.begin(), cyc.end(), [&](Index i) { return perm[i] != kNone; })) continue;
    for (std::size_t k = 0; k < period; ++k) perm[cyc[k]] = cyc[(k + 1) % period];
  }
  for (Index i = 0; i < n; ++i)
    if (perm[i] == kNone) perm[i] = i;
  return perm;
}

struct Search {
  PolarResult result;
  SolveResult lp;
};

Search search(std::span<const SampledVectorField> fields, int m, SearchMode mode, std::uint64_t seed) {
  check_fields(fields, m);
  const Index n = fields[0].size();
  if (mode == SearchMode::Exhaustive && n > kInvolutionEnumCap)
    throw Error(ErrorCode::CapExceeded, "exhaustive search is limited to n <= " + std::to_string(kInvolutionEnumCap));
  const auto w = pairing_tables(fields);
  const auto elems = all_indices(n);

  Search out;
  out.lp = solve_sym(field_cost(fields), fields[0].base(), Sense::Max);

  Permutation best;
  double best_score = -std::numeric_limits<double>::infinity();
  auto offer = [&](const Permutation& p) {
    const double s = orbit_score(w, p, elems);
    if (s > best_score + kImprove || (std::abs(s - best_score) <= kImprove && p < best)) {
      best_score = std::max(s, best_score);
      best = p;
    }
  };

  switch (mode) {
    case SearchMode::Exhaustive:
      for_each_m_involution(n, m, [&](const Permutation& p) {
        const double s = orbit_score(w, p, elems);
        if (s > best_score + kImprove) {  // enumeration is lexicographic, so ties keep the smallest
          best_score = s;
          best = p;
        }
      });
      break;
    case SearchMode::Matching: {
      LocalSearch ls(w, m);
      Permutation p = round_plan(out.lp.plan, m);
      ls.polish(p);
      offer(p);
      break;
    }
    case SearchMode::LocalSearch: {
      LocalSearch ls(w, m);
      std::mt19937_64 rng(seed);
      for (int r = 0; r < kLocalSearchRestarts; ++r) {
        Permutation p = r == 0 ? elems : random_m_involution(n, m, rng);
        ls.polish(p);
        offer(p);
      }
      break;
    }
  }

  auto& res = out.result;
  res.s = {best, m};
  res.objective = involution_objective(fields, res.s);
  res.lp_bound = out.lp.primal_value;
  res.certificate_gap = res.lp_bound - res.objective;
  if (mode != SearchMode::Exhaustive && res.certificate_gap > 1e-6)
    res.note = "relaxation not attained at tested involutions";
  else if (mode == SearchMode::Exhaustive && res.certificate_gap > 1e-9)
    res.note = "relaxation strictly above every m-involution";
  return out;
}

}  // namespace

bool is_permutation(std::span<const Index> perm) {
  std::vector<bool> seen(perm.size(), false);
  for (Index v : perm) {
    if (v >= perm.size() || seen[v]) return false;
    seen[v] = true;
  }
  return true;
}

bool is_m_involution(std::span<const Index> perm, int m) {
  if (m < 1 || !is_permutation(perm)) return false;
  const auto p = power(perm, m);
  for (Index i = 0; i < p.size(); ++i)
    if (p[i] != i) return false;
  return true;
}

Permutation inverse(std::span<const Index> perm) {
  if (!is_permutation(perm)) throw Error(ErrorCode::InvalidArgument, "not a permutation");
  Permutation inv(perm.size());
  for (Index i = 0; i < perm.size(); ++i) inv[perm[i]] = i;
  return inv;
}

Permutation power(std::span<const Index> perm, int k) {
  if (k < 0) return power(inverse(perm), -k);
  Permutation out = all_indices(perm.size());
  for (int step = 0; step < k; ++step)
    for (auto& v : out) v = perm[v];
  return out;
}

int permutation_order(std::span<const Index> perm) {
  long long order = 1;
  for (const auto& c : cycles(perm)) order = std::lcm(order, static_cast<long long>(c.size()));
  return static_cast<int>(std::min<long long>(order, std::numeric_limits<int>::max()));
}

std::vector<std::vector<Index>> cycles(std::span<const Index> perm) {
  std::vector<std::vector<Index>> out;
  std::vector<bool> seen(perm.size(), false);
  for (Index i = 0; i < perm.size(); ++i) {
    if (seen[i]) continue;
    std::vector<Index> c;
    for (Index j = i; !seen[j]; j = perm[j]) {
      seen[j] = true;
      c.push_back(j);
    }
    out.push_back(std::move(c));
  }
  return out;
}

void for_each_m_involution(Index n, int m, const std::function<void(const Permutation&)>& fn) {
  if (m < 1) throw Error(ErrorCode::InvalidArgument, "m must be positive");
  if (n > kInvolutionEnumCap)
    throw Error(ErrorCode::CapExceeded,
                "enumeration of n = " + std::to_string(n) + " exceeds the cap " + std::to_string(kInvolutionEnumCap));
  const auto mm = static_cast<Index>(m);
  Permutation perm(n, kNone), inv(n, kNone);
  // Fill perm[0], perm[1], ... with ascending values; every open chain stays
  // at most m long and every closed cycle has length dividing m.
  std::function<void(Index)> rec = [&](Index i) {
    if (i == n) {
      fn(perm);
      return;
    }
    Index back = 1;
    for (Index c = i; inv[c] != kNone; c = inv[c]) ++back;
    for (Index v = 0; v < n; ++v) {
      if (inv[v] != kNone) continue;
      Index fwd = 1;
      bool closes = v == i;
      if (!closes)
        for (Index c = v; perm[c] != kNone; c = perm[c]) ++fwd;
      if (!closes) {
        Index end = v;
        while (perm[end] != kNone) end = perm[end];
        closes = end == i;
      }
      if (closes) {
        if (mm % back != 0) continue;  // the chain ending at i is the whole cycle
      } else if (back + fwd > mm) {
        continue;
      }
      perm[i] = v;
      inv[v] = i;
      rec(i + 1);
      perm[i] = kNone;
      inv[v] = kNone;
    }
  };
  rec(0);
}

std::vector<MInvolution> enumerate_m_involutions(Index n, int m) {
  std::vector<MInvolution> out;
  for_each_m_involution(n, m, [&](const Permutation& p) { out.push_back({p, m}); });
  return out;
}

CouplingPlan involution_plan(std::span<const Index> perm, int m) {
  if (!is_permutation(perm)) throw Error(ErrorCode::InvalidArgument, "not a permutation");
  const Index n = perm.size();
  std::vector<std::vector<Index>> maps;
  for (int k = 1; k < m; ++k) maps.push_back(power(perm, k));
  const std::vector<double> weights(n, 1.0 / static_cast<double>(n));
  return graph_plan(weights, maps, std::vector<Index>(static_cast<std::size_t>(m), n));
}

double involution_objective(std::span<const SampledVectorField> fields, const MInvolution& s) {
  if (fields.empty()) throw Error(ErrorCode::DimensionMismatch, "at least one field is required");
  const int m = static_cast<int>(fields.size()) + 1;
  check_fields(fields, m);
  const Index n = fields[0].size();
  if (s.perm.size() != n) throw Error(ErrorCode::DimensionMismatch, "permutation size differs from the support");
  if (!is_permutation(s.perm)) throw Error(ErrorCode::InvalidArgument, "S is not a permutation");
  const auto& x = fields[0].base().points();
  double sum = 0.0;
  for (Index i = 0; i < n; ++i) {
    Index j = i;
    for (const auto& u : fields) {
      j = s.perm[j];
      sum += u.values().row(static_cast<Eigen::Index>(i)).dot(x.row(static_cast<Eigen::Index>(j)));
    }
  }
  return sum / static_cast<double>(n);
}

SearchMode parse_search_mode(std::string_view text) {
  if (text == "exhaustive") return SearchMode::Exhaustive;
  if (text == "matching") return SearchMode::Matching;
  if (text == "local_search" || text == "local-search") return SearchMode::LocalSearch;
  throw Error(ErrorCode::InvalidArgument, "unknown search mode \"" + std::string(text) + "\"");
}

std::string_view to_string(SearchMode mode) {
  switch (mode) {
    case SearchMode::Exhaustive: return "exhaustive";
    case SearchMode::Matching: return "matching";
    case SearchMode::LocalSearch: return "local_search";
  }
  return "?";
}

PolarResult best_involution(std::span<const SampledVectorField> fields, int m, SearchMode mode, std::uint64_t seed) {
  return search(fields, m, mode, seed).result;
}

Characterization characterization_check(std::span<const Index> map, const DiscreteMeasure& mu) {
  if (!mu.is_uniform()) throw Error(ErrorCode::NonUniformWeights, "characterization needs uniform weights");
  const Index n = mu.size();
  if (map.size() != n) throw Error(ErrorCode::DimensionMismatch, "map size differs from the support");
  for (Index v : map)
    if (v >= n) throw Error(ErrorCode::MapOutOfRange, "map value " + std::to_string(v) + " outside the support");

  Characterization c;
  const std::vector<double> weights(mu.weights().data(), mu.weights().data() + n);
  const auto plan = graph_plan(weights, {std::vector<Index>(map.begin(), map.end())}, {n, n});
  c.plan_symmetric = cyclic_shift_plan(plan) == plan;

  std::vector<int> hits(n, 0);
  for (Index v : map) ++hits[v];
  bool preserving = std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; });
  bool involutive = true;
  for (Index i = 0; i < n; ++i) involutive = involutive && map[map[i]] == i;
  c.measure_involution = preserving && involutive;

  // Integer counts of the pairs (S x_i, x_i); H = E_jk - E_kj sums to count(j,k) - count(k,j).
  std::vector<std::vector<long>> count(n, std::vector<long>(n, 0));
  for (Index i = 0; i < n; ++i) ++count[map[i]][i];
  c.antisymmetric_null = true;
  for (Index j = 0; j < n; ++j)
    for (Index k = j + 1; k < n; ++k)
      if (count[j][k] - count[k][j] != 0) c.antisymmetric_null = false;
  return c;
}

MInvolution swap_involution(Index i, Index j, Index n) {
  if (i >= n || j >= n)
    throw Error(ErrorCode::IndexOutOfRange, "swap indices must be below " + std::to_string(n));
  if (i == j) throw Error(ErrorCode::IndexOutOfRange, "swap needs two distinct indices");
  Permutation p = all_indices(n);
  std::swap(p[i], p[j]);
  return {p, 2};
}

PolarResult polar_brenier(const SampledVectorField& u) {
  const auto& base = u.base();
  if (!base.is_uniform()) throw Error(ErrorCode::NonUniformWeights, "polar factorization needs uniform weights");
  if (u.values().cols() != base.points().cols())
    throw Error(ErrorCode::DimensionMismatch, "field values and base points differ in dimension");
  if (auto dup = duplicate_values(u))
    throw Error(ErrorCode::DegenerateField, "field values at atoms " + std::to_string(dup->first) + " and " +
                                                std::to_string(dup->second) + " coincide");
  const auto n = static_cast<Eigen::Index>(base.size());
  Eigen::MatrixXd c(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < n; ++k) c(i, k) = (base.points().row(i) - u.values().row(k)).squaredNorm();
  const auto a = solve_assignment(c, Sense::Min);

  PolarResult r;
  r.assignment = a.perm;
  r.s.perm = inverse(a.perm);
  r.s.m = permutation_order(r.s.perm);
  for (Index i = 0; i < r.s.perm.size(); ++i)
    if (r.assignment[r.s.perm[i]] != i) throw Error(ErrorCode::InvalidArgument, "T o S does not reproduce u");
  r.objective = a.value;
  double dual = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) dual += a.row_potential[i] + a.col_potential[i];
  r.lp_bound = dual / static_cast<double>(n);
  r.certificate_gap = r.lp_bound - r.objective;
  return r;
}

HamiltonianResult polar_hamiltonian(std::span<const SampledVectorField> fields, int m, SearchMode mode,
                                    std::uint64_t seed) {
  auto found = search(fields, m, mode, seed);
  HamiltonianResult h;
  h.polar = std::move(found.result);
  const auto sym = symmetrize_cost(field_cost(fields));
  h.potentials = extract_duals(found.lp, sym);
  const Index n = fields[0].size();
  std::vector<Permutation> powers;
  for (int k = 0; k < m; ++k) powers.push_back(power(h.polar.s.perm, k));
  IndexTuple t(static_cast<std::size_t>(m));
  for (Index i = 0; i < n; ++i) {
    for (int k = 0; k < m; ++k) t[static_cast<std::size_t>(k)] = powers[static_cast<std::size_t>(k)][i];
    const double r = h.potentials.value_at(t) - sym.at(t);
    h.graph_residuals.push_back(r);
    h.max_residual = std::max(h.max_residual, std::abs(r));
  }
  h.slackness_holds = h.max_residual <= kSlackTol;
  return h;
}

}  // namespace mmot
