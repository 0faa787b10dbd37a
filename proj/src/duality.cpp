#include "mmot/duality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "mmot/error.hpp"
#include "mmot/qp.hpp"

namespace mmot {

namespace {

// Above this the dense constraint matrix is not worth building; the solver
// duals are already optimal, just not canonical.
constexpr std::uint64_t kCanonicalTupleCap = 200'000;

double sense_sign(Sense s) { return s == Sense::Min ? 1.0 : -1.0; }

void check_potentials(const DualPotentials& p, const TensorShape& shape) {
  if (p.arity() != shape.arity()) throw Error(ErrorCode::DimensionMismatch, "potential count differs from cost arity");
  for (std::size_t k = 0; k < p.arity(); ++k)
    if (p.u[k].size() != shape.size(k))
      throw Error(ErrorCode::DimensionMismatch, "potential " + std::to_string(k) + " has the wrong length");
}

}  // namespace

double dual_infeasibility(const DualPotentials& p, const CostTensor& cost) {
  const auto& shape = cost.shape();
  check_potentials(p, shape);
  const double s = sense_sign(p.sense);
  double worst = -std::numeric_limits<double>::infinity();
  IndexTuple idx(shape.arity(), 0);
  std::uint64_t f = 0;
  do {
    worst = std::max(worst, s * (p.value_at(idx) - cost.at(f)));
    ++f;
  } while (next_tuple(idx, shape.sizes()));
  return worst;
}

DualPotentials extract_duals(const SolveResult& result, const CostTensor& cost) {
  if (!result.exact) throw Error(ErrorCode::NotExactSolve, "dual extraction needs an exact solve");
  const auto& shape = cost.shape();
  check_potentials(result.dual, shape);
  if (shape.total() > kCanonicalTupleCap) return result.dual;

  const std::size_t m = shape.arity();
  std::vector<Eigen::Index> offset(m + 1, 0);
  for (std::size_t k = 0; k < m; ++k) offset[k + 1] = offset[k] + static_cast<Eigen::Index>(shape.size(k));
  const Eigen::Index nv = offset[m];
  const double s = sense_sign(result.sense);

  std::vector<std::uint64_t> eq, in;
  for (std::uint64_t f = 0; f < shape.total(); ++f) (result.plan.at(f) > kSupportMass ? eq : in).push_back(f);

  auto fill = [&](const std::vector<std::uint64_t>& tuples, double sign, Eigen::MatrixXd& rows, Eigen::VectorXd& rhs) {
    rows = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(tuples.size()), nv);
    rhs.resize(static_cast<Eigen::Index>(tuples.size()));
    IndexTuple idx(m);
    for (std::size_t r = 0; r < tuples.size(); ++r) {
      shape.unflat(tuples[r], idx);
      const auto row = static_cast<Eigen::Index>(r);
      for (std::size_t k = 0; k < m; ++k) rows(row, offset[k] + static_cast<Eigen::Index>(idx[k])) += sign;
      rhs[row] = sign * cost.at(tuples[r]);
    }
  };
  Eigen::MatrixXd eq_rows, in_rows;
  Eigen::VectorXd eq_rhs, in_rhs;
  fill(eq, 1.0, eq_rows, eq_rhs);
  // min sense: sum u <= c, i.e. -sum u >= -c; max sense: sum u >= c.
  fill(in, -s, in_rows, in_rhs);

  const auto x = min_norm_point(eq_rows, eq_rhs, in_rows, in_rhs);
  if (!x) return result.dual;
  DualPotentials out;
  out.sense = result.sense;
  for (std::size_t k = 0; k < m; ++k)
    out.u.emplace_back(x->data() + offset[k], x->data() + offset[k + 1]);

  const double value = out.objective(result.marginal_weights);
  if (dual_infeasibility(out, cost) > 1e-9 || std::abs(value - result.primal_value) > 1e-8) return result.dual;
  return out;
}

DualPotentials c_transform(const DualPotentials& p, std::size_t i, const CostTensor& cost) {
  const auto& shape = cost.shape();
  if (i >= shape.arity())
    throw Error(ErrorCode::AxisOutOfRange,
                "axis " + std::to_string(i) + " out of range for arity " + std::to_string(shape.arity()));
  check_potentials(p, shape);
  const double s = sense_sign(p.sense);
  // Work in min sense: u_i = min (s*c - s*sum_{j != i} u_j), then undo the sign.
  std::vector<double> best(shape.size(i), std::numeric_limits<double>::infinity());
  IndexTuple idx(shape.arity(), 0);
  std::uint64_t f = 0;
  do {
    double rest = 0.0;
    for (std::size_t j = 0; j < shape.arity(); ++j)
      if (j != i) rest += p.u[j][idx[j]];
    best[idx[i]] = std::min(best[idx[i]], s * (cost.at(f) - rest));
    ++f;
  } while (next_tuple(idx, shape.sizes()));
  DualPotentials out = p;
  for (Index a = 0; a < shape.size(i); ++a) out.u[i][a] = s * best[a];
  return out;
}

std::vector<SlackViolation> slackness_report(const CouplingPlan& plan, const DualPotentials& p,
                                             const CostTensor& cost) {
  if (!(plan.shape() == cost.shape())) throw Error(ErrorCode::DimensionMismatch, "plan and cost shapes differ");
  check_potentials(p, cost.shape());
  std::vector<SlackViolation> out;
  IndexTuple idx(plan.arity());
  plan.for_each([&](std::uint64_t f, double mass) {
    if (mass <= kSupportMass) return;
    plan.shape().unflat(f, idx);
    const double r = p.value_at(idx) - cost.at(f);
    if (std::abs(r) > kSlackTol) out.push_back({idx, mass, r});
  });
  return out;
}

MongeMaps graph_test(const CouplingPlan& plan, double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "threshold must lie in (0, 1]");
  const auto& shape = plan.shape();
  const std::size_t m = shape.arity();
  const Index n0 = shape.size(0);
  std::vector<double> best_mass(n0, -1.0);
  std::vector<std::uint64_t> best_flat(n0, 0);
  const std::uint64_t row = n0 == 0 ? 0 : shape.total() / n0;
  for (Index i = 0; i < n0; ++i) best_flat[i] = i * row;  // lowest tuple when the row is empty
  plan.for_each([&](std::uint64_t f, double mass) {
    const Index i = static_cast<Index>(f / row);
    if (mass > best_mass[i]) {  // strict: ties keep the lower flat index
      best_mass[i] = mass;
      best_flat[i] = f;
    }
  });
  MongeMaps out;
  double on_graph = 0.0;
  for (Index i = 0; i < n0; ++i) {
    out.selected.push_back(shape.unflat(best_flat[i]));
    on_graph += std::max(0.0, best_mass[i]);
  }
  const double total = plan.total_mass();
  out.concentration = total > 0.0 ? std::clamp(on_graph / total, 0.0, 1.0) : 0.0;
  if (out.concentration >= threshold) {
    std::vector<std::vector<Index>> maps(m - 1, std::vector<Index>(n0));
    for (Index i = 0; i < n0; ++i)
      for (std::size_t k = 1; k < m; ++k) maps[k - 1][i] = out.selected[i][k];
    out.maps = std::move(maps);
  }
  return out;
}

GsPotentials gs_potential_maps(const DualPotentials& p, std::span<const Points> supports, const CostTensor& cost) {
  if (cost.kind() != CostKind::Quadratic)
    throw Error(ErrorCode::NotQuadraticCost, "potential maps need the quadratic cost");
  check_potentials(p, cost.shape());
  if (supports.size() != p.arity()) throw Error(ErrorCode::DimensionMismatch, "one support per axis expected");
  const double m = static_cast<double>(p.arity());
  GsPotentials g;
  g.one_dimensional = !supports.empty() && supports[0].cols() == 1;
  for (std::size_t k = 0; k < p.arity(); ++k) {
    const auto& pts = supports[k];
    std::vector<double> phi(p.u[k].size()), f(p.u[k].size());
    for (std::size_t a = 0; a < phi.size(); ++a) {
      const double sq = pts.row(static_cast<Eigen::Index>(a)).squaredNorm();
      phi[a] = 0.5 * (m - 1.0) * sq - 0.5 * p.u[k][a];
      f[a] = 0.5 * sq + phi[a];
    }
    if (g.one_dimensional) {
      std::vector<Index> order(phi.size());
      std::iota(order.begin(), order.end(), Index{0});
      std::sort(order.begin(), order.end(), [&](Index a, Index b) { return pts(a, 0) < pts(b, 0); });
      double worst = std::numeric_limits<double>::infinity();
      for (std::size_t j = 1; j + 1 < order.size(); ++j) {
        const double x0 = pts(order[j - 1], 0), x1 = pts(order[j], 0), x2 = pts(order[j + 1], 0);
        if (x1 == x0 || x2 == x1) continue;
        // Divided-difference form, exact for affine f on uneven grids.
        const double d = (f[order[j + 1]] - f[order[j]]) / (x2 - x1) - (f[order[j]] - f[order[j - 1]]) / (x1 - x0);
        worst = std::min(worst, d);
      }
      g.min_second_difference.push_back(worst);
      if (worst < -1e-8) g.convex = false;
    }
    g.phi.push_back(std::move(phi));
    g.f.push_back(std::move(f));
  }
  return g;
}

double barycentric_residual(const GsPotentials& g, const Points& support0, const MongeMaps& maps,
                            std::span<const Points> supports) {
  if (!g.one_dimensional || !maps.maps) return std::numeric_limits<double>::quiet_NaN();
  const auto n = static_cast<Index>(support0.rows());
  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&](Index a, Index b) { return support0(a, 0) < support0(b, 0); });
  double worst = 0.0;
  for (std::size_t j = 1; j + 1 < order.size(); ++j) {
    const Index a = order[j];
    const double span = support0(order[j + 1], 0) - support0(order[j - 1], 0);
    if (span == 0.0) continue;
    const double grad = (g.f[0][order[j + 1]] - g.f[0][order[j - 1]]) / span;
    double target = support0(a, 0);
    for (std::size_t k = 0; k < maps.maps->size(); ++k)
      target += supports[k + 1]((*maps.maps)[k][a], 0);
    worst = std::max(worst, std::abs(grad - target));
  }
  return worst;
}

DiscreteMeasure barycenter_measure(const CouplingPlan& plan, std::span<const Points> supports) {
  const auto& shape = plan.shape();
  if (supports.size() != shape.arity())
    throw Error(ErrorCode::DimensionMismatch, "plan arity and support count differ");
  for (std::size_t k = 0; k < supports.size(); ++k) {
    if (static_cast<Index>(supports[k].rows()) != shape.size(k))
      throw Error(ErrorCode::DimensionMismatch, "support " + std::to_string(k) + " does not match the plan");
    if (supports[k].cols() != supports[0].cols())
      throw Error(ErrorCode::DimensionMismatch, "supports differ in dimension");
  }
  const double m = static_cast<double>(shape.arity());
  const auto d = supports[0].cols();
  std::vector<Eigen::RowVectorXd> pts;
  std::vector<double> mass;
  IndexTuple idx(shape.arity());
  plan.for_each([&](std::uint64_t f, double w) {
    shape.unflat(f, idx);
    Eigen::RowVectorXd b = Eigen::RowVectorXd::Zero(d);
    for (std::size_t k = 0; k < idx.size(); ++k) b += supports[k].row(static_cast<Eigen::Index>(idx[k]));
    b /= m;
    for (std::size_t a = 0; a < pts.size(); ++a)
      if (pts[a] == b) {
        mass[a] += w;
        return;
      }
    pts.push_back(b);
    mass.push_back(w);
  });
  if (pts.empty()) throw Error(ErrorCode::EmptySupport, "plan carries no mass");
  Points out(static_cast<Eigen::Index>(pts.size()), d);
  Vector weights(static_cast<Eigen::Index>(pts.size()));
  const double total = std::accumulate(mass.begin(), mass.end(), 0.0);
  for (std::size_t a = 0; a < pts.size(); ++a) {
    out.row(static_cast<Eigen::Index>(a)) = pts[a];
    weights[static_cast<Eigen::Index>(a)] = mass[a] / total;
  }
  return {std::move(out), std::move(weights)};
}

BarycenterProbe barycenter_optimality_probe(const DiscreteMeasure& nu, std::span<const DiscreteMeasure> marginals,
                                            std::span<const DiscreteMeasure> candidates) {
  auto value = [&](const DiscreteMeasure& v) {
    double s = 0.0;
    for (const auto& mu : marginals) s += wasserstein2(mu, v);
    return s;
  };
  BarycenterProbe r;
  r.nu_value = value(nu);
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    r.candidate_values.push_back(value(candidates[c]));
    if (r.candidate_values.back() < r.nu_value - 1e-8) r.better.push_back(c);
  }
  return r;
}

Certificate certify(const SolveResult& result, const CostTensor& cost) {
  Certificate c;
  c.primal = result.primal_value;
  c.dual = result.dual_value;
  c.gap = result.gap;
  c.concentration = graph_test(result.plan, 1.0).concentration;
  c.violations = slackness_report(result.plan, result.dual, cost);
  return c;
}

}  // namespace mmot
