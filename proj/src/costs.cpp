#include "mmot/costs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "mmot/error.hpp"

namespace mmot {

CostTensor::CostTensor(TensorShape shape, std::vector<double> values, CostKind kind)
    : shape_(std::move(shape)), values_(std::move(values)), kind_(kind) {
  if (values_.size() != shape_.total()) throw Error(ErrorCode::DimensionMismatch, "cost values do not match shape");
  for (double v : values_)
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "cost tensor entries must be finite");
}

CostTensor CostTensor::lazy(TensorShape shape, Evaluator eval, CostKind kind) {
  CostTensor c;
  c.shape_ = std::move(shape);
  c.eval_ = std::move(eval);
  c.kind_ = kind;
  return c;
}

double CostTensor::at(std::uint64_t flat) const {
  if (is_dense()) return values_[flat];
  return at(shape_.unflat(flat));
}

double CostTensor::at(std::span<const Index> idx) const {
  if (is_dense()) return values_[shape_.flat(idx)];
  const double v = eval_(idx);
  if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "cost evaluator returned a non-finite value");
  return v;
}

double CostTensor::integrate(const CouplingPlan& plan) const {
  if (!(plan.shape() == shape_)) throw Error(ErrorCode::DimensionMismatch, "plan and cost shapes differ");
  double sum = 0.0;
  plan.for_each([&](std::uint64_t f, double v) { sum += v * at(f); });
  return sum;
}

std::pair<double, double> CostTensor::range() const {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::uint64_t f = 0; f < shape_.total(); ++f) {
    const double v = at(f);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return {lo, hi};
}

SampledVectorField::SampledVectorField(DiscreteMeasure base, Points values)
    : base_(std::move(base)), values_(std::move(values)) {
  if (static_cast<Index>(values_.rows()) != base_.size())
    throw Error(ErrorCode::DimensionMismatch, "field has " + std::to_string(values_.rows()) + " values for " +
                                                  std::to_string(base_.size()) + " atoms");
  if (!values_.allFinite()) throw Error(ErrorCode::NonFinite, "field values must be finite");
}

std::optional<std::pair<Index, Index>> duplicate_values(const SampledVectorField& field) {
  std::map<std::vector<double>, Index> seen;
  for (Index i = 0; i < field.size(); ++i) {
    const auto v = field.value(i);
    std::vector<double> key(v.data(), v.data() + v.size());
    auto [it, inserted] = seen.emplace(std::move(key), i);
    if (!inserted) return std::pair{it->second, i};
  }
  return std::nullopt;
}

namespace {

TensorShape shape_of(std::span<const Points> supports) {
  if (supports.empty()) throw Error(ErrorCode::InvalidArgument, "need at least one support");
  std::vector<Index> sizes;
  for (const auto& s : supports) {
    if (s.cols() != supports.front().cols())
      throw Error(ErrorCode::DimensionMismatch, "supports live in different dimensions");
    sizes.push_back(static_cast<Index>(s.rows()));
  }
  return TensorShape(std::move(sizes));
}

template <class Fn>
CostTensor tabulate(TensorShape shape, Fn&& fn, CostKind kind) {
  if (!shape.dense_ok())
    return CostTensor::lazy(shape, [fn](std::span<const Index> idx) { return fn(idx); }, kind);
  std::vector<double> values(shape.total());
  IndexTuple idx(shape.arity(), 0);
  std::uint64_t f = 0;
  do {
    values[f++] = fn(std::span<const Index>(idx));
  } while (next_tuple(idx, shape.sizes()));
  return CostTensor(std::move(shape), std::move(values), kind);
}

}  // namespace

CostTensor quadratic_cost(std::span<const Points> supports) {
  auto shape = shape_of(supports);
  std::vector<Points> pts(supports.begin(), supports.end());
  // Pair terms are summed in sorted order so that permuting axes with equal
  // supports permutes the terms without changing the rounded sum.
  auto fn = [pts](std::span<const Index> idx) {
    std::vector<double> terms;
    terms.reserve(idx.size() * (idx.size() - 1) / 2);
    for (std::size_t i = 0; i < idx.size(); ++i)
      for (std::size_t j = i + 1; j < idx.size(); ++j)
        terms.push_back(
            (pts[i].row(static_cast<Eigen::Index>(idx[i])) - pts[j].row(static_cast<Eigen::Index>(idx[j]))).squaredNorm());
    std::sort(terms.begin(), terms.end());
    double sum = 0.0;
    for (double t : terms) sum += t;
    return sum;
  };
  return tabulate(std::move(shape), fn, CostKind::Quadratic);
}

CostTensor vector_field_cost(std::span<const SampledVectorField> fields, std::span<const Points> supports) {
  auto shape = shape_of(supports);
  if (fields.size() + 1 != supports.size())
    throw Error(ErrorCode::DimensionMismatch, "need m-1 fields for m supports");
  for (const auto& u : fields) {
    if (u.base().points() != supports[0])
      throw Error(ErrorCode::BaseMismatch, "field base differs from the axis-0 support");
    if (u.values().cols() != supports[0].cols())
      throw Error(ErrorCode::DimensionMismatch, "field values and support points differ in dimension");
  }
  std::vector<Points> vals;
  for (const auto& u : fields) vals.push_back(u.values());
  std::vector<Points> pts(supports.begin(), supports.end());
  auto fn = [vals, pts](std::span<const Index> idx) {
    double sum = 0.0;
    const auto i0 = static_cast<Eigen::Index>(idx[0]);
    for (std::size_t k = 1; k < idx.size(); ++k)
      sum += vals[k - 1].row(i0).dot(pts[k].row(static_cast<Eigen::Index>(idx[k])));
    return sum;
  };
  return tabulate(std::move(shape), fn, CostKind::VectorField);
}

CostTensor symmetrize_cost(const CostTensor& cost) {
  const auto& shape = cost.shape();
  if (!shape.homogeneous()) throw Error(ErrorCode::HeterogeneousSupports, "axes carry supports of different sizes");
  const std::size_t m = shape.arity();
  const double inv_m = 1.0 / static_cast<double>(m);
  // Summing over the orbit in ascending flat order makes every orbit member
  // receive the bit-identical value.
  auto orbit_mean = [shape, m, inv_m](const CostTensor& c, std::uint64_t f) {
    std::vector<std::uint64_t> members{f};
    for (std::size_t k = 1; k < m; ++k) members.push_back(shape.shifted(members.back()));
    std::sort(members.begin(), members.end());
    double sum = 0.0;
    for (auto g : members) sum += c.at(g);
    return sum * inv_m;
  };
  if (!cost.is_dense()) {
    return CostTensor::lazy(
        shape, [cost, shape, orbit_mean](std::span<const Index> idx) { return orbit_mean(cost, shape.flat(idx)); },
        CostKind::Symmetrized);
  }
  std::vector<double> values(shape.total());
  for (std::uint64_t f = 0; f < shape.total(); ++f) values[f] = orbit_mean(cost, f);
  return CostTensor(shape, std::move(values), CostKind::Symmetrized);
}

Eigen::VectorXd block_cycle(const Eigen::VectorXd& v, int times) {
  if (v.size() % 3 != 0) throw Error(ErrorCode::DimensionMismatch, "block cycle needs a length divisible by 3");
  const Eigen::Index b = v.size() / 3;
  Eigen::VectorXd out = v;
  for (int t = 0; t < ((times % 3) + 3) % 3; ++t) {
    Eigen::VectorXd next(v.size());
    next.segment(0, b) = out.segment(b, b);
    next.segment(b, b) = out.segment(2 * b, b);
    next.segment(2 * b, b) = out.segment(0, b);
    out = std::move(next);
  }
  return out;
}

DiscreteMeasure GraphEmbedding::marginal(int k) const {
  Points pts(embedded.rows(), embedded.cols());
  for (Eigen::Index i = 0; i < embedded.rows(); ++i) pts.row(i) = block_cycle(embedded.row(i).transpose(), k).transpose();
  return DiscreteMeasure::uniform(std::move(pts));
}

namespace {

void require_shared_uniform_base(const SampledVectorField& u1, const SampledVectorField& u2) {
  if (u1.base().points() != u2.base().points() || u1.base().weights() != u2.base().weights())
    throw Error(ErrorCode::BaseMismatch, "u1 and u2 must share one base measure");
  if (!u1.base().is_uniform()) throw Error(ErrorCode::NonUniformWeights, "graph embedding needs uniform weights");
  if (u1.values().cols() != u1.base().points().cols() || u2.values().cols() != u1.base().points().cols())
    throw Error(ErrorCode::DimensionMismatch, "fields must map R^d to R^d");
}

}  // namespace

GraphEmbedding embed_graph_m3(const SampledVectorField& u1, const SampledVectorField& u2) {
  require_shared_uniform_base(u1, u2);
  const Eigen::Index n = static_cast<Eigen::Index>(u1.size());
  const Eigen::Index d = u1.base().points().cols();
  GraphEmbedding g;
  g.base = u1.base().points();
  g.embedded = Points::Zero(n, 6 * d);
  g.embedded.middleCols(0, d) = g.base;
  g.embedded.middleCols(d, d) = g.base;
  g.embedded.middleCols(2 * d, d) = u1.values();
  g.embedded.middleCols(5 * d, d) = u2.values();
  return g;
}

ReductionCheck reduction_identity(const SampledVectorField& u1, const SampledVectorField& u2,
                                  const CouplingPlan& plan) {
  const auto g = embed_graph_m3(u1, u2);
  const Index n = u1.size();
  if (plan.arity() != 3 || !(plan.shape() == TensorShape({n, n, n})))
    throw Error(ErrorCode::MarginalMismatch, "plan must be a 3-way coupling on the base support");
  const double w = 1.0 / static_cast<double>(n);
  std::vector<std::vector<double>> margs;
  for (std::size_t k = 0; k < 3; ++k) {
    margs.push_back(marginal(plan, k));
    for (double v : margs.back())
      if (std::abs(v - w) > kMarginalTol)
        throw Error(ErrorCode::MarginalMismatch, "axis " + std::to_string(k) + " marginal is not the base measure");
  }

  // C: the three pairwise squared distances between P(x), sigma P(y),
  // sigma^2 P(z), evaluated directly in R^{6d}.
  std::vector<Eigen::VectorXd> p0, p1, p2;
  for (Index i = 0; i < n; ++i) {
    Eigen::VectorXd p = g.embedded.row(static_cast<Eigen::Index>(i)).transpose();
    p0.push_back(p);
    p1.push_back(block_cycle(p, 1));
    p2.push_back(block_cycle(p, 2));
  }
  ReductionCheck out;
  IndexTuple idx(3);
  plan.for_each([&](std::uint64_t f, double mass) {
    plan.shape().unflat(f, idx);
    const auto &a = p0[idx[0]], &b = p1[idx[1]], &c = p2[idx[2]];
    out.quadratic_objective += mass * ((a - b).squaredNorm() + (b - c).squaredNorm() + (c - a).squaredNorm());
  });

  // D: three times the symmetrized cost <u2(x), y> + <u1(x), z>.
  const std::vector<SampledVectorField> fields{u2, u1};
  const std::vector<Points> supports(3, g.base);
  const auto sym = symmetrize_cost(vector_field_cost(fields, supports));
  out.symmetric_objective = 3.0 * sym.integrate(plan);

  // Each axis contributes 4|x|^2 + 2|u1(x)|^2 + 2|u2(x)|^2 once the six
  // squared differences and twelve pure squares are expanded.
  for (std::size_t k = 0; k < 3; ++k)
    for (Index i = 0; i < n; ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      out.constant += margs[k][i] * (4.0 * g.base.row(r).squaredNorm() + 2.0 * u1.values().row(r).squaredNorm() +
                                     2.0 * u2.values().row(r).squaredNorm());
    }
  out.residual = std::abs(out.quadratic_objective + 2.0 * out.symmetric_objective - out.constant);
  return out;
}

double reduction_identity_residual(const SampledVectorField& u1, const SampledVectorField& u2,
                                   const CouplingPlan& plan) {
  return reduction_identity(u1, u2, plan).residual;
}

}  // namespace mmot
