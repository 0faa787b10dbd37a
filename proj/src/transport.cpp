#include "mmot/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mmot/error.hpp"
#include "mmot/simplex.hpp"

namespace mmot {

namespace {

std::vector<std::vector<double>> weight_vectors(std::span<const DiscreteMeasure> marginals) {
  std::vector<std::vector<double>> w;
  for (const auto& m : marginals) w.emplace_back(m.weights().data(), m.weights().data() + m.weights().size());
  return w;
}

void check_marginals(const CostTensor& cost, std::span<const DiscreteMeasure> marginals) {
  if (marginals.size() != cost.arity())
    throw Error(ErrorCode::DimensionMismatch, std::to_string(marginals.size()) + " marginals for a " +
                                                  std::to_string(cost.arity()) + "-way cost");
  for (std::size_t k = 0; k < marginals.size(); ++k)
    if (marginals[k].size() != cost.shape().size(k))
      throw Error(ErrorCode::DimensionMismatch, "marginal " + std::to_string(k) + " has " +
                                                    std::to_string(marginals[k].size()) + " atoms, cost axis has " +
                                                    std::to_string(cost.shape().size(k)));
}

void finish(SolveResult& r, const CostTensor& cost) {
  normalize_potentials(r.dual, r.marginal_weights[0]);
  r.primal_value = cost.integrate(r.plan);
  r.dual_value = r.dual.objective(r.marginal_weights);
  r.gap = std::abs(r.primal_value - r.dual_value);
}

}  // namespace

SolveResult solve_mm(const CostTensor& cost, std::span<const DiscreteMeasure> marginals, Sense sense,
                     const SolveOptions& options) {
  check_marginals(cost, marginals);
  if (!cost.is_dense() || !cost.shape().dense_ok())
    throw Error(ErrorCode::SizeCapExceeded, "exact solve needs a dense cost with at most " +
                                                std::to_string(kDenseCap) + " entries");
  SolveResult r;
  r.sense = sense;
  r.dual.sense = sense;
  r.marginal_weights = weight_vectors(marginals);

  const bool square_uniform = marginals.size() == 2 && marginals[0].size() == marginals[1].size() &&
                              marginals[0].is_uniform() && marginals[1].is_uniform();
  if (options.allow_assignment && square_uniform) {
    const auto n = static_cast<Eigen::Index>(marginals[0].size());
    const Eigen::MatrixXd c = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        cost.values().data(), n, n);
    const auto a = solve_assignment(c, sense);
    const double w = 1.0 / static_cast<double>(n);
    std::vector<double> weights(static_cast<std::size_t>(n), w);
    r.plan = graph_plan(weights, {a.perm}, {static_cast<Index>(n), static_cast<Index>(n)});
    r.dual.u = {a.row_potential, a.col_potential};
    r.method = "assignment";
    r.iterations = static_cast<std::size_t>(n);
  } else {
    std::vector<double> c = cost.values();
    if (sense == Sense::Max)
      for (double& v : c) v = -v;
    auto lp = solve_transport_lp(cost.shape(), c, r.marginal_weights);
    r.plan = CouplingPlan::from_dense(cost.shape(), std::move(lp.x));
    r.dual.u = std::move(lp.potentials);
    if (sense == Sense::Max)
      for (auto& axis : r.dual.u)
        for (double& v : axis) v = -v;
    r.method = "simplex";
    r.iterations = lp.iterations;
  }
  finish(r, cost);
  return r;
}

SolveResult solve_sym(const CostTensor& cost, const DiscreteMeasure& mu, Sense sense, const SolveOptions& options) {
  if (!cost.shape().homogeneous())
    throw Error(ErrorCode::HeterogeneousSupports, "symmetric problem needs one support on every axis");
  if (cost.shape().size(0) != mu.size())
    throw Error(ErrorCode::DimensionMismatch, "cost axes do not match the support of mu");
  const auto sym = symmetrize_cost(cost);
  const std::vector<DiscreteMeasure> marginals(cost.arity(), mu);
  auto r = solve_mm(sym, marginals, sense, options);
  r.plan = symmetrize_plan(r.plan);
  finish(r, sym);
  return r;
}

SinkhornResult sinkhorn_mm(const CostTensor& cost, std::span<const DiscreteMeasure> marginals, double epsilon,
                           double tol, std::size_t max_iter, Sense sense) {
  check_marginals(cost, marginals);
  if (!(epsilon > 0.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be positive");
  const auto& shape = cost.shape();
  if (!shape.dense_ok()) throw Error(ErrorCode::SizeCapExceeded, "Sinkhorn index space exceeds the dense cap");
  const std::size_t m = shape.arity();
  const std::uint64_t total = shape.total();
  const double sign = (sense == Sense::Min) ? 1.0 : -1.0;
  constexpr double neg_inf = -std::numeric_limits<double>::infinity();

  std::vector<double> scaled(total);  // c / epsilon, min-sense
  for (std::uint64_t f = 0; f < total; ++f) scaled[f] = sign * cost.at(f) / epsilon;
  std::vector<std::vector<double>> logw(m), g(m);  // g_k = f_k / epsilon
  for (std::size_t k = 0; k < m; ++k) {
    for (Index i = 0; i < shape.size(k); ++i) {
      const double w = marginals[k].weight(i);
      logw[k].push_back(w > 0.0 ? std::log(w) : neg_inf);
    }
    g[k].assign(shape.size(k), 0.0);
  }

  std::vector<std::vector<Index>> digits(m, std::vector<Index>(total));
  {
    IndexTuple idx(m);
    for (std::uint64_t f = 0; f < total; ++f) {
      shape.unflat(f, idx);
      for (std::size_t k = 0; k < m; ++k) digits[k][f] = idx[k];
    }
  }
  auto log_mass = [&](std::uint64_t f) {
    double s = -scaled[f];
    for (std::size_t l = 0; l < m; ++l) s += g[l][digits[l][f]] + logw[l][digits[l][f]];
    return s;
  };

  SinkhornResult best;
  best.marginal_violation = std::numeric_limits<double>::infinity();
  std::vector<double> mass(total);
  for (std::size_t it = 1; it <= max_iter; ++it) {
    for (std::size_t k = 0; k < m; ++k) {
      // Streaming log-sum-exp over the slice t_k = i, excluding axis k.
      std::vector<double> mx(shape.size(k), neg_inf), acc(shape.size(k), 0.0);
      for (std::uint64_t f = 0; f < total; ++f) {
        const Index i = digits[k][f];
        const double term = log_mass(f) - g[k][i] - logw[k][i];
        if (term == neg_inf || std::isnan(term)) continue;
        if (term > mx[i]) {
          acc[i] = acc[i] * std::exp(mx[i] - term) + 1.0;
          mx[i] = term;
        } else {
          acc[i] += std::exp(term - mx[i]);
        }
      }
      for (Index i = 0; i < shape.size(k); ++i)
        g[k][i] = (logw[k][i] == neg_inf || mx[i] == neg_inf) ? 0.0 : -(mx[i] + std::log(acc[i]));
    }

    for (std::uint64_t f = 0; f < total; ++f) {
      const double lm = log_mass(f);
      mass[f] = (lm == neg_inf || std::isnan(lm)) ? 0.0 : std::exp(lm);
    }
    double violation = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      std::vector<double> marg(shape.size(k), 0.0);
      for (std::uint64_t f = 0; f < total; ++f) marg[digits[k][f]] += mass[f];
      double l1 = 0.0;
      for (Index i = 0; i < shape.size(k); ++i) l1 += std::abs(marg[i] - marginals[k].weight(i));
      violation = std::max(violation, l1);
    }
    const bool converged = violation <= tol;
    if (violation < best.marginal_violation || converged) {
      double s = 0.0;
      for (double v : mass) s += v;
      std::vector<double> normalized = mass;
      for (double& v : normalized) v /= s;
      best.plan = CouplingPlan::from_dense(shape, std::move(normalized));
      best.marginal_violation = violation;
      best.iterations = it;
      best.potentials = g;
      for (auto& axis : best.potentials)
        for (double& v : axis) v *= sign * epsilon;
    }
    if (converged) {
      best.converged = true;
      break;
    }
  }
  best.value = cost.integrate(best.plan);
  for (std::size_t k = 1; k < m; ++k) best.entropic_bound += epsilon * std::log(static_cast<double>(shape.size(k)));
  return best;
}

double wasserstein2(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  if (mu.dim() != nu.dim())
    throw Error(ErrorCode::DimensionMismatch,
                "dimensions " + std::to_string(mu.dim()) + " and " + std::to_string(nu.dim()));
  const std::vector<Points> supports{mu.points(), nu.points()};
  const std::vector<DiscreteMeasure> marginals{mu, nu};
  const auto r = solve_mm(quadratic_cost(supports), marginals, Sense::Min);
  return std::max(0.0, r.primal_value);
}

}  // namespace mmot
