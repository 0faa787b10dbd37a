#include "mmot/measures.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "mmot/error.hpp"

namespace mmot {

DiscreteMeasure::DiscreteMeasure(Points points, Vector weights)
    : points_(std::move(points)), weights_(std::move(weights)) {
  validate(points_, weights_);
}

DiscreteMeasure DiscreteMeasure::uniform(Points points) {
  const auto n = points.rows();
  if (n == 0) throw Error(ErrorCode::EmptySupport, "uniform measure needs at least one point");
  return DiscreteMeasure(std::move(points), Vector::Constant(n, 1.0 / static_cast<double>(n)));
}

void DiscreteMeasure::validate(const Points& points, const Vector& weights) {
  if (weights.size() == 0) throw Error(ErrorCode::EmptySupport, "measure has no atoms");
  if (points.rows() != weights.size())
    throw Error(ErrorCode::DimensionMismatch,
                std::to_string(points.rows()) + " points but " + std::to_string(weights.size()) + " weights");
  if (!points.allFinite()) throw Error(ErrorCode::NonFinite, "measure points must be finite");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    if (!std::isfinite(weights[i])) throw Error(ErrorCode::NonFinite, "weight " + std::to_string(i) + " is not finite");
    if (weights[i] < 0.0)
      throw Error(ErrorCode::NegativeWeight, "weight " + std::to_string(i) + " = " + std::to_string(weights[i]));
    sum += weights[i];
  }
  if (std::abs(sum - 1.0) > kWeightSumTol)
    throw Error(ErrorCode::NonNormalized, "weights sum to " + std::to_string(sum));
}

bool DiscreteMeasure::is_uniform() const {
  const double w = 1.0 / static_cast<double>(size());
  return (weights_.array() == w).all();
}

void validate(const DiscreteMeasure& measure) { DiscreteMeasure::validate(measure.points(), measure.weights()); }

CouplingPlan CouplingPlan::from_dense(TensorShape shape, std::vector<double> mass) {
  if (mass.size() != shape.total()) throw Error(ErrorCode::DimensionMismatch, "dense plan size does not match shape");
  if (!shape.dense_ok()) {
    std::vector<Entry> entries;
    for (std::uint64_t f = 0; f < mass.size(); ++f)
      if (mass[f] != 0.0) entries.emplace_back(f, mass[f]);
    return from_entries(std::move(shape), std::move(entries));
  }
  CouplingPlan plan;
  plan.shape_ = std::move(shape);
  plan.dense_ = std::move(mass);
  plan.check_masses();
  return plan;
}

CouplingPlan CouplingPlan::from_entries(TensorShape shape, std::vector<Entry> entries) {
  CouplingPlan plan;
  for (const auto& e : entries)
    if (e.first >= shape.total()) throw Error(ErrorCode::IndexOutOfRange, "plan entry outside the index space");
  if (shape.dense_ok()) {
    plan.dense_.assign(shape.total(), 0.0);
    for (const auto& [f, v] : entries) plan.dense_[f] += v;
  } else {
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) { return a.first < b.first; });
    for (const auto& e : entries) {
      if (!plan.sparse_.empty() && plan.sparse_.back().first == e.first)
        plan.sparse_.back().second += e.second;
      else
        plan.sparse_.push_back(e);
    }
    std::erase_if(plan.sparse_, [](const Entry& e) { return e.second == 0.0; });
    if (plan.sparse_.size() > kSparseEntryCap)
      throw Error(ErrorCode::SizeCapExceeded, "sparse plan has " + std::to_string(plan.sparse_.size()) +
                                                  " entries (cap " + std::to_string(kSparseEntryCap) + ")");
  }
  plan.shape_ = std::move(shape);
  plan.check_masses();
  return plan;
}

void CouplingPlan::check_masses() const {
  double total = 0.0;
  bool bad = false;
  for_each([&](std::uint64_t, double v) {
    if (!std::isfinite(v) || v < 0.0) bad = true;
    total += v;
  });
  if (bad) throw Error(ErrorCode::NegativeWeight, "plan masses must be finite and nonnegative");
  if (std::abs(total - 1.0) > kPlanMassTol)
    throw Error(ErrorCode::NonNormalized, "plan mass sums to " + std::to_string(total));
}

double CouplingPlan::at(std::uint64_t flat) const {
  if (is_dense()) return dense_[flat];
  auto it = std::lower_bound(sparse_.begin(), sparse_.end(), flat,
                             [](const Entry& e, std::uint64_t f) { return e.first < f; });
  return (it != sparse_.end() && it->first == flat) ? it->second : 0.0;
}

double CouplingPlan::total_mass() const {
  double total = 0.0;
  for_each([&](std::uint64_t, double v) { total += v; });
  return total;
}

std::vector<CouplingPlan::Entry> CouplingPlan::entries() const {
  std::vector<Entry> out;
  for_each([&](std::uint64_t f, double v) { out.emplace_back(f, v); });
  return out;
}

std::size_t CouplingPlan::nonzeros() const {
  std::size_t count = 0;
  for_each([&](std::uint64_t, double) { ++count; });
  return count;
}

bool CouplingPlan::operator==(const CouplingPlan& other) const {
  return shape_ == other.shape_ && entries() == other.entries();
}

std::vector<double> marginal(const CouplingPlan& plan, std::size_t axis) {
  const auto& shape = plan.shape();
  if (axis >= shape.arity())
    throw Error(ErrorCode::AxisOutOfRange,
                "axis " + std::to_string(axis) + " of a " + std::to_string(shape.arity()) + "-way plan");
  std::vector<double> out(shape.size(axis), 0.0);
  IndexTuple idx(shape.arity());
  plan.for_each([&](std::uint64_t f, double v) {
    shape.unflat(f, idx);
    out[idx[axis]] += v;
  });
  return out;
}

double max_marginal_error(const CouplingPlan& plan, std::span<const DiscreteMeasure> marginals) {
  if (marginals.size() != plan.arity())
    throw Error(ErrorCode::DimensionMismatch, "marginal count does not match plan arity");
  double worst = 0.0;
  for (std::size_t k = 0; k < marginals.size(); ++k) {
    if (marginals[k].size() != plan.shape().size(k))
      throw Error(ErrorCode::DimensionMismatch, "marginal " + std::to_string(k) + " size does not match plan");
    const auto got = marginal(plan, k);
    for (Index i = 0; i < got.size(); ++i) worst = std::max(worst, std::abs(got[i] - marginals[k].weight(i)));
  }
  return worst;
}

namespace {

void require_homogeneous(const TensorShape& shape) {
  if (!shape.homogeneous()) throw Error(ErrorCode::HeterogeneousSupports, "axes carry supports of different sizes");
}

}  // namespace

CouplingPlan cyclic_shift_plan(const CouplingPlan& plan) {
  const auto& shape = plan.shape();
  require_homogeneous(shape);
  std::vector<CouplingPlan::Entry> moved;
  moved.reserve(plan.nonzeros());
  // New mass at (i_1, ..., i_{m-1}, i_0) is the old mass at (i_0, ..., i_{m-1}).
  plan.for_each([&](std::uint64_t f, double v) { moved.emplace_back(shape.shifted(f), v); });
  return CouplingPlan::from_entries(shape, std::move(moved));
}

CouplingPlan symmetrize_plan(const CouplingPlan& plan) {
  const auto& shape = plan.shape();
  require_homogeneous(shape);
  const std::size_t m = shape.arity();
  std::map<std::uint64_t, double> orbit_sum;  // keyed by smallest orbit member
  std::map<std::uint64_t, std::vector<std::uint64_t>> orbit_members;
  plan.for_each([&](std::uint64_t f, double v) {
    std::vector<std::uint64_t> members{f};
    std::uint64_t g = f;
    for (std::size_t k = 1; k < m; ++k) {
      g = shape.shifted(g);
      members.push_back(g);
    }
    const auto rep = *std::min_element(members.begin(), members.end());
    // Each shift of `f` receives v/m; summing over the m shifts visits
    // every member of the orbit m/|orbit| times.
    orbit_sum[rep] += v;
    auto& stored = orbit_members[rep];
    if (stored.empty()) {
      std::sort(members.begin(), members.end());
      members.erase(std::unique(members.begin(), members.end()), members.end());
      stored = std::move(members);
    }
  });
  std::vector<CouplingPlan::Entry> out;
  for (const auto& [rep, sum] : orbit_sum) {
    const auto& members = orbit_members[rep];
    const double per = sum / static_cast<double>(members.size());
    for (auto g : members) out.emplace_back(g, per);
  }
  return CouplingPlan::from_entries(shape, std::move(out));
}

CouplingPlan graph_plan(std::span<const double> weights, const std::vector<std::vector<Index>>& maps,
                        const std::vector<Index>& axis_sizes) {
  if (axis_sizes.size() != maps.size() + 1)
    throw Error(ErrorCode::DimensionMismatch, "need one map per axis beyond the first");
  TensorShape shape(axis_sizes);
  if (weights.size() != axis_sizes[0]) throw Error(ErrorCode::DimensionMismatch, "weights do not match axis 0");
  std::vector<CouplingPlan::Entry> entries;
  IndexTuple idx(shape.arity());
  for (Index i = 0; i < weights.size(); ++i) {
    idx[0] = i;
    for (std::size_t k = 0; k < maps.size(); ++k) {
      if (maps[k].size() != weights.size()) throw Error(ErrorCode::DimensionMismatch, "map length mismatch");
      if (maps[k][i] >= axis_sizes[k + 1]) throw Error(ErrorCode::MapOutOfRange, "map value outside target support");
      idx[k + 1] = maps[k][i];
    }
    if (weights[i] != 0.0) entries.emplace_back(shape.flat(idx), weights[i]);
  }
  return CouplingPlan::from_entries(std::move(shape), std::move(entries));
}

CouplingPlan product_plan(std::span<const DiscreteMeasure> measures) {
  std::vector<Index> sizes;
  for (const auto& m : measures) sizes.push_back(m.size());
  TensorShape shape(sizes);
  if (!shape.dense_ok()) throw Error(ErrorCode::SizeCapExceeded, "product plan exceeds the dense cap");
  std::vector<double> mass(shape.total());
  IndexTuple idx(shape.arity(), 0);
  std::uint64_t f = 0;
  do {
    double v = 1.0;
    for (std::size_t k = 0; k < idx.size(); ++k) v *= measures[k].weight(idx[k]);
    mass[f++] = v;
  } while (next_tuple(idx, sizes));
  return CouplingPlan::from_dense(std::move(shape), std::move(mass));
}

DiscreteMeasure pushforward(const DiscreteMeasure& measure, const PointMap& map) {
  std::map<std::vector<double>, Index> slot;
  std::vector<std::vector<double>> points;
  std::vector<double> weights;
  for (Index i = 0; i < measure.size(); ++i) {
    const Eigen::VectorXd y = map(measure.point(i));
    std::vector<double> key(y.data(), y.data() + y.size());
    if (!points.empty() && key.size() != points.front().size())
      throw Error(ErrorCode::DimensionMismatch, "point map changes output dimension between atoms");
    auto [it, inserted] = slot.emplace(key, points.size());
    if (inserted) {
      points.push_back(std::move(key));
      weights.push_back(0.0);
    }
    weights[it->second] += measure.weight(i);
  }
  Points out(static_cast<Eigen::Index>(points.size()), static_cast<Eigen::Index>(points.front().size()));
  for (std::size_t r = 0; r < points.size(); ++r)
    for (std::size_t c = 0; c < points[r].size(); ++c) out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = points[r][c];
  return DiscreteMeasure(std::move(out), Eigen::Map<const Vector>(weights.data(), static_cast<Eigen::Index>(weights.size())));
}

DiscreteMeasure pushforward(const DiscreteMeasure& measure, std::span<const Index> index_map) {
  if (index_map.size() != measure.size())
    throw Error(ErrorCode::MapOutOfRange, "index map must be defined on every support index");
  Vector weights = Vector::Zero(static_cast<Eigen::Index>(measure.size()));
  for (Index i = 0; i < index_map.size(); ++i) {
    if (index_map[i] >= measure.size())
      throw Error(ErrorCode::MapOutOfRange, "index map sends " + std::to_string(i) + " to " + std::to_string(index_map[i]));
    weights[static_cast<Eigen::Index>(index_map[i])] += measure.weight(i);
  }
  return DiscreteMeasure(measure.points(), std::move(weights));
}

}  // namespace mmot
