#include "mmot/monotone.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "mmot/error.hpp"
#include "mmot/involution.hpp"
#include "mmot/transport.hpp"

namespace mmot {

namespace {

constexpr Index kNoPartner = std::numeric_limits<Index>::max();
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<Index> sizes_of(const std::vector<std::vector<double>>& axes) {
  std::vector<Index> s;
  for (const auto& a : axes) s.push_back(a.size());
  return s;
}

// Coordinates of every node, row-major.
std::vector<double> node_coords(const GridFunction& g) {
  const std::size_t d = g.dims();
  std::vector<double> out(g.shape().total() * d);
  IndexTuple idx(d, 0);
  std::uint64_t f = 0;
  do {
    for (std::size_t k = 0; k < d; ++k) out[f * d + k] = g.axes()[k][idx[k]];
    ++f;
  } while (next_tuple(idx, g.shape().sizes()));
  return out;
}

void require_even(const GridFunction& g, ErrorCode code) {
  if (g.dims() == 0 || g.dims() % 2 != 0)
    throw Error(code, "grid needs an even number of axes, got " + std::to_string(g.dims()));
}

}  // namespace

GraphSample::GraphSample(Points x_, Points p_) : x(std::move(x_)), p(std::move(p_)) {
  if (x.rows() == 0) throw Error(ErrorCode::EmptySample, "graph sample has no points");
  if (x.rows() != p.rows() || x.cols() != p.cols())
    throw Error(ErrorCode::DimensionMismatch, "graph sample points and values differ in shape");
  if (!x.allFinite() || !p.allFinite()) throw Error(ErrorCode::NonFinite, "graph sample has non-finite entries");
}

GraphSample GraphSample::of(const SampledVectorField& u) { return {u.base().points(), u.values()}; }

PairCheck is_monotone(const GraphSample& s) {
  PairCheck r;
  r.worst_value = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < s.size(); ++i)
    for (Index j = i + 1; j < s.size(); ++j) {
      const auto a = static_cast<Eigen::Index>(i), b = static_cast<Eigen::Index>(j);
      const double v = (s.x.row(a) - s.x.row(b)).dot(s.p.row(a) - s.p.row(b));
      if (v < r.worst_value) {
        r.worst_value = v;
        r.worst = std::make_pair(i, j);
      }
    }
  if (s.size() < 2) r.worst_value = 0.0;
  r.ok = r.worst_value >= -kMonotoneTol;
  if (r.ok) r.worst.reset();
  return r;
}

CycleCheck is_m_cyclically_monotone(const GraphSample& s, int m, CyclicMode mode, std::uint64_t trials,
                                    std::uint64_t seed) {
  if (m < 1) throw Error(ErrorCode::InvalidArgument, "m must be positive");
  const Index n = s.size();
  const auto nn = static_cast<Eigen::Index>(n);
  // g(a, b) = <p_a, x_a - x_b>: the step from b to a.
  Eigen::MatrixXd g(nn, nn);
  for (Eigen::Index a = 0; a < nn; ++a)
    for (Eigen::Index b = 0; b < nn; ++b) g(a, b) = s.p.row(a).dot(s.x.row(a) - s.x.row(b));

  CycleCheck r;
  r.worst_value = std::numeric_limits<double>::infinity();
  IndexTuple t(static_cast<std::size_t>(m), 0);
  auto visit = [&] {
    double sum = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k)
      sum += g(static_cast<Eigen::Index>(t[(k + 1) % t.size()]), static_cast<Eigen::Index>(t[k]));
    ++r.tuples;
    if (sum < r.worst_value) {
      r.worst_value = sum;
      r.worst_cycle = t;
    }
  };
  if (mode == CyclicMode::Exhaustive) {
    std::uint64_t total = 1;
    for (int k = 0; k < m; ++k) {
      total *= n;
      if (total > kCyclicCap)
        throw Error(ErrorCode::CapExceeded, "n^m exceeds " + std::to_string(kCyclicCap) + " cycles");
    }
    const std::vector<Index> sizes(static_cast<std::size_t>(m), n);
    do visit();
    while (next_tuple(t, sizes));
  } else {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<Index> pick(0, n - 1);
    for (std::uint64_t trial = 0; trial < trials; ++trial) {
      for (auto& v : t) v = pick(rng);
      visit();
    }
  }
  r.ok = r.worst_value >= -kMonotoneTol;
  return r;
}

double fitzpatrick(const GraphSample& s, const Vector& p, const Vector& x) {
  if (p.size() != s.x.cols() || x.size() != s.x.cols())
    throw Error(ErrorCode::DimensionMismatch, "evaluation point dimension differs from the sample");
  double best = kNegInf;
  for (Eigen::Index k = 0; k < s.x.rows(); ++k) {
    const auto y = s.x.row(k).transpose();
    const auto q = s.p.row(k).transpose();
    best = std::max(best, p.dot(y) + q.dot(x - y));
  }
  return best;
}

GridFunction::GridFunction(std::vector<std::vector<double>> axes, std::vector<double> values)
    : axes_(std::move(axes)), values_(std::move(values)) {
  if (axes_.empty()) throw Error(ErrorCode::GridMismatch, "grid has no axes");
  for (std::size_t k = 0; k < axes_.size(); ++k) {
    const auto& a = axes_[k];
    if (a.empty()) throw Error(ErrorCode::GridMismatch, "axis " + std::to_string(k) + " is empty");
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (!std::isfinite(a[i])) throw Error(ErrorCode::NonFinite, "axis " + std::to_string(k) + " is not finite");
      if (i > 0 && !(a[i] > a[i - 1]))
        throw Error(ErrorCode::GridMismatch, "axis " + std::to_string(k) + " is not strictly increasing");
    }
  }
  shape_ = TensorShape(sizes_of(axes_));
  if (values_.size() != shape_.total())
    throw Error(ErrorCode::GridMismatch, "grid has " + std::to_string(shape_.total()) + " nodes but " +
                                             std::to_string(values_.size()) + " values");
}

double GridFunction::max_spacing() const {
  double h = 0.0;
  for (const auto& a : axes_)
    for (std::size_t i = 1; i < a.size(); ++i) h = std::max(h, a[i] - a[i - 1]);
  return h;
}

double lipschitz_estimate(const GridFunction& g) {
  double lip = 0.0;
  const auto& shape = g.shape();
  IndexTuple idx(g.dims(), 0);
  do {
    const double v = g.at(idx);
    for (std::size_t k = 0; k < g.dims(); ++k) {
      if (idx[k] + 1 >= shape.size(k)) continue;
      ++idx[k];
      const double w = g.at(idx);
      --idx[k];
      const double h = g.axes()[k][idx[k] + 1] - g.axes()[k][idx[k]];
      if (std::isfinite(v) && std::isfinite(w)) lip = std::max(lip, std::abs(w - v) / h);
    }
  } while (next_tuple(idx, shape.sizes()));
  return lip;
}

double grid_tolerance(const GridFunction& g) { return g.max_spacing() * lipschitz_estimate(g); }

GridFunction fitzpatrick_grid(const GraphSample& sample, const std::vector<std::vector<double>>& axes) {
  const auto d = static_cast<std::size_t>(sample.x.cols());
  if (axes.size() != 2 * d)
    throw Error(ErrorCode::GridMismatch, "Fitzpatrick grid needs " + std::to_string(2 * d) + " axes");
  GridFunction out(axes, std::vector<double>(TensorShape(sizes_of(axes)).total(), 0.0));
  const auto coords = node_coords(out);
  Vector p(static_cast<Eigen::Index>(d)), x(static_cast<Eigen::Index>(d));
  for (std::uint64_t f = 0; f < out.shape().total(); ++f) {
    for (std::size_t k = 0; k < d; ++k) {
      p[static_cast<Eigen::Index>(k)] = coords[f * 2 * d + k];
      x[static_cast<Eigen::Index>(k)] = coords[f * 2 * d + d + k];
    }
    out.values()[f] = fitzpatrick(sample, p, x);
  }
  return out;
}

GridFunction conjugate_swapped(const GridFunction& n) {
  require_even(n, ErrorCode::GridMismatch);
  const std::size_t dd = n.dims(), d = dd / 2;
  const auto coords = node_coords(n);
  const std::uint64_t total = n.shape().total();
  std::vector<double> out(total, kNegInf);
  for (std::uint64_t a = 0; a < total; ++a) {
    const double* pa = &coords[a * dd];  // (p, x)
    double best = kNegInf;
    for (std::uint64_t b = 0; b < total; ++b) {
      const double* qb = &coords[b * dd];  // (q, y)
      double v = -n.values()[b];
      for (std::size_t k = 0; k < d; ++k) v += pa[d + k] * qb[k] + pa[k] * qb[d + k];
      best = std::max(best, v);
    }
    out[a] = best;
  }
  return {n.axes(), std::move(out)};
}

GridFunction selfdual_interpolation(const GridFunction& n, const GridFunction& nstar) {
  if (n.axes() != nstar.axes()) throw Error(ErrorCode::GridMismatch, "N and N* live on different grids");
  require_even(n, ErrorCode::GridMismatch);
  const std::size_t dd = n.dims();
  // partner[k][a][a1]: node a2 with g[a1] + g[a2] = 2 g[a], if any.
  std::vector<std::vector<std::vector<Index>>> partner(dd);
  for (std::size_t k = 0; k < dd; ++k) {
    const auto& g = n.axes()[k];
    partner[k].assign(g.size(), std::vector<Index>(g.size(), kNoPartner));
    for (Index a = 0; a < g.size(); ++a)
      for (Index a1 = 0; a1 < g.size(); ++a1) {
        const double target = 2.0 * g[a] - g[a1];
        const auto it = std::lower_bound(g.begin(), g.end(), target - 1e-12 * (1.0 + std::abs(target)));
        if (it != g.end() && std::abs(*it - target) <= 1e-12 * (1.0 + std::abs(target)))
          partner[k][a][a1] = static_cast<Index>(it - g.begin());
      }
  }

  const auto& shape = n.shape();
  std::vector<double> out(shape.total());
  IndexTuple node(dd, 0);
  std::uint64_t f = 0;
  do {
    std::vector<std::vector<std::pair<Index, Index>>> choices(dd);
    std::vector<Index> counts(dd);
    for (std::size_t k = 0; k < dd; ++k) {
      for (Index a1 = 0; a1 < shape.size(k); ++a1)
        if (partner[k][node[k]][a1] != kNoPartner) choices[k].emplace_back(a1, partner[k][node[k]][a1]);
      counts[k] = choices[k].size();  // never empty: (a, a) always qualifies
    }
    IndexTuple pick(dd, 0), z1(dd), z2(dd);
    double best = std::numeric_limits<double>::infinity();
    do {
      double penalty = 0.0;
      for (std::size_t k = 0; k < dd; ++k) {
        z1[k] = choices[k][pick[k]].first;
        z2[k] = choices[k][pick[k]].second;
        const double diff = n.axes()[k][z1[k]] - n.axes()[k][z2[k]];
        penalty += diff * diff;
      }
      best = std::min(best, 0.5 * n.at(z1) + 0.5 * nstar.at(z2) + 0.125 * penalty);
    } while (next_tuple(pick, counts));
    out[f++] = best;
  } while (next_tuple(node, shape.sizes()));
  return {n.axes(), std::move(out)};
}

SandwichCheck sandwich_check(const GridFunction& n, const GridFunction& l, const GridFunction& nstar) {
  if (n.axes() != l.axes() || n.axes() != nstar.axes())
    throw Error(ErrorCode::GridMismatch, "sandwich operands live on different grids");
  SandwichCheck r;
  r.tolerance = std::max({grid_tolerance(n), grid_tolerance(l), grid_tolerance(nstar)});
  r.worst_lower = r.worst_upper = std::numeric_limits<double>::infinity();
  for (std::size_t f = 0; f < n.values().size(); ++f) {
    r.worst_lower = std::min(r.worst_lower, l.values()[f] - n.values()[f]);
    r.worst_upper = std::min(r.worst_upper, nstar.values()[f] - l.values()[f]);
  }
  r.ok = r.worst_lower >= -r.tolerance && r.worst_upper >= -r.tolerance;
  return r;
}

GridFunction partial_legendre(const GridFunction& l, std::size_t first, std::size_t count,
                              const std::optional<std::vector<std::vector<double>>>& out_axes) {
  if (count == 0 || first + count > l.dims())
    throw Error(ErrorCode::GridMismatch, "transform block lies outside the grid's axes");
  if (out_axes && out_axes->size() != count)
    throw Error(ErrorCode::GridMismatch, "output axes must match the transformed block");
  auto axes = l.axes();
  for (std::size_t k = 0; k < count; ++k) axes[first + k] = out_axes ? (*out_axes)[k] : l.axes()[first + k];
  GridFunction out(axes, std::vector<double>(TensorShape(sizes_of(axes)).total(), 0.0));

  std::vector<Index> block_sizes;
  for (std::size_t k = 0; k < count; ++k) block_sizes.push_back(l.shape().size(first + k));
  IndexTuple node(out.dims(), 0), src(l.dims());
  std::uint64_t f = 0;
  do {
    src = node;
    IndexTuple b(count, 0);
    double best = kNegInf;
    do {
      double v = 0.0;
      for (std::size_t k = 0; k < count; ++k) {
        src[first + k] = b[k];
        v += axes[first + k][node[first + k]] * l.axes()[first + k][b[k]];
      }
      best = std::max(best, v - l.at(src));
    } while (next_tuple(b, block_sizes));
    out.values()[f++] = best;
  } while (next_tuple(node, out.shape().sizes()));
  return out;
}

GridFunction antisymmetrize(const GridFunction& k) {
  require_even(k, ErrorCode::NonSquareGrid);
  const std::size_t d = k.dims() / 2;
  for (std::size_t i = 0; i < d; ++i)
    if (k.axes()[i] != k.axes()[d + i])
      throw Error(ErrorCode::NonSquareGrid, "axis " + std::to_string(i) + " differs from its partner");
  std::vector<double> out(k.values().size());
  IndexTuple idx(k.dims(), 0), swapped(k.dims());
  std::uint64_t f = 0;
  do {
    for (std::size_t i = 0; i < d; ++i) {
      swapped[i] = idx[d + i];
      swapped[d + i] = idx[i];
    }
    out[f++] = 0.5 * (k.values()[k.shape().flat(idx)] - k.at(swapped));
  } while (next_tuple(idx, k.shape().sizes()));
  return {k.axes(), std::move(out)};
}

EquivalenceReport monotone_equivalence_report(const SampledVectorField& u) {
  const auto& mu = u.base();
  if (!mu.is_uniform()) throw Error(ErrorCode::NonUniformWeights, "equivalence report needs uniform weights");
  const Index n = mu.size();
  if (n > kEquivalenceCap)
    throw Error(ErrorCode::CapExceeded, "equivalence report is limited to n <= " + std::to_string(kEquivalenceCap));
  const auto& x = mu.points();
  const auto& v = u.values();
  if (v.cols() != x.cols()) throw Error(ErrorCode::DimensionMismatch, "field and base differ in dimension");

  EquivalenceReport r;
  const auto pairs = is_monotone(GraphSample::of(u));
  r.monotone = pairs.ok;
  r.worst_pair = pairs.worst;

  const double nd = static_cast<double>(n);
  double best_sup = kNegInf, min_residual = std::numeric_limits<double>::infinity();
  const double id_residual = (v - x).squaredNorm();
  for_each_m_involution(n, 2, [&](const Permutation& s) {
    double gain = 0.0, residual = 0.0;
    for (Index i = 0; i < n; ++i) {
      const auto a = static_cast<Eigen::Index>(i), b = static_cast<Eigen::Index>(s[i]);
      gain += v.row(a).dot(x.row(b) - x.row(a));
      residual += (v.row(a) - x.row(b)).squaredNorm();
    }
    gain /= nd;
    if (gain > best_sup) {  // lexicographic enumeration: first maximizer kept
      best_sup = gain;
      r.best_involution = s;
    }
    min_residual = std::min(min_residual, residual);
  });
  r.involution_sup = best_sup;
  r.involution_sup_zero = best_sup <= 1e-9;
  r.projection_gap = id_residual - min_residual;
  r.identity_projection = r.projection_gap <= 1e-9;

  for (Index i = 0; i < n; ++i)
    r.diagonal_value += v.row(static_cast<Eigen::Index>(i)).dot(x.row(static_cast<Eigen::Index>(i))) / nd;
  const std::vector<SampledVectorField> fields{u};
  const std::vector<Points> supports{x, x};
  r.lp_value = solve_sym(vector_field_cost(fields, supports), mu, Sense::Max).primal_value;
  r.lp_diagonal = std::abs(r.lp_value - r.diagonal_value) <= 1e-9;
  return r;
}

}  // namespace mmot
