#include "mmot/app/acceptance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "mmot/app/generate.hpp"
#include "mmot/duality.hpp"
#include "mmot/error.hpp"
#include "mmot/involution.hpp"
#include "mmot/monotone.hpp"
#include "mmot/transport.hpp"

namespace mmot::acceptance {

namespace {

using io::json;

std::string fmt(const char* f, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

std::vector<Index> identity(Index n) {
  std::vector<Index> id(n);
  std::iota(id.begin(), id.end(), Index{0});
  return id;
}

// Fields whose values are pairwise distinct on distinct base points.
std::vector<SampledVectorField> distinct_fields(gen::Rng& rng, const DiscreteMeasure& mu, int count) {
  std::vector<SampledVectorField> out;
  while (static_cast<int>(out.size()) < count) {
    auto f = gen::field(rng, mu);
    if (!duplicate_values(f)) out.push_back(std::move(f));
  }
  return out;
}

CriterionResult strong_duality() {
  CriterionResult r{1, "strong duality and complementary slackness", true, "", json::object()};
  gen::Rng rng(1001);
  double worst_gap = 0.0;
  std::size_t violations = 0;
  json failures = json::array();
  for (int t = 0; t < 50; ++t) {
    const std::size_t m = 2 + static_cast<std::size_t>(t % 2);
    const Index n = 3 + static_cast<Index>((t / 2) % 3);
    std::vector<DiscreteMeasure> ms;
    for (std::size_t k = 0; k < m; ++k) ms.push_back(gen::measure(rng, n, 1));
    const auto cost = gen::cost(rng, std::vector<Index>(m, n));
    const auto sol = solve_mm(cost, ms, Sense::Min);
    const auto cert = certify(sol, cost);
    worst_gap = std::max(worst_gap, cert.gap);
    violations += cert.violations.size();
    if (cert.gap > 1e-8 || !cert.violations.empty()) failures.push_back({{"instance", t}, {"m", m}, {"n", n}});
  }
  r.pass = failures.empty();
  r.detail = {{"instances", 50}, {"max_gap", worst_gap}, {"slack_violations", violations}, {"failures", failures}};
  r.summary = fmt("50 instances, max |primal - dual| = %.3g, %.0f slackness violations", worst_gap,
                  static_cast<double>(violations));
  return r;
}

CriterionResult symmetric_attainment() {
  CriterionResult r{2, "symmetric relaxation attained by an m-involution", true, "", json::object()};
  gen::Rng rng(1002);
  json failures = json::array();
  double worst = 0.0;
  for (int t = 0; t < 25; ++t) {
    const int m = t < 13 ? 2 : 3;
    const Index n = m == 2 ? 3 + static_cast<Index>(t % 5) : 3 + static_cast<Index>(t % 3);
    const auto mu = gen::uniform_measure(rng, n, 1 + static_cast<Index>(t % 2));
    const auto fields = distinct_fields(rng, mu, m - 1);
    const auto best = best_involution(fields, m, SearchMode::Exhaustive);
    const double gap = std::abs(best.lp_bound - best.objective);
    worst = std::max(worst, gap);
    if (gap > 1e-9)
      failures.push_back({{"instance", t},
                          {"m", m},
                          {"n", n},
                          {"lp", best.lp_bound},
                          {"best_involution", best.objective},
                          {"involution", best.s.perm}});
  }
  r.pass = failures.empty();
  r.detail = {{"instances", 25}, {"max_gap", worst}, {"failures", failures}};
  r.summary = fmt("%.0f of 25 instances with LP above the best m-involution, max gap %.3g",
                  static_cast<double>(failures.size()), worst);
  return r;
}

CriterionResult monotone_equivalence() {
  CriterionResult r{3, "four monotonicity tests agree", true, "", json::object()};
  gen::Rng rng(1003);
  json failures = json::array();
  int monotone_seen = 0, other_seen = 0;
  for (int t = 0; t < 40; ++t) {
    const bool want_monotone = t < 20;
    const Index n = 3 + static_cast<Index>(t % 6);
    const Index d = 1 + static_cast<Index>(t % 2);
    const auto mu = gen::uniform_measure(rng, n, d);
    const auto& x = mu.points();
    Points v;
    if (want_monotone && t % 2 == 0) {
      // Positive definite linear map.
      const Eigen::MatrixXd b = gen::points(rng, d, d);
      const Eigen::MatrixXd a = b * b.transpose() + 0.05 * Eigen::MatrixXd::Identity(d, d);
      v = x * a;
    } else if (want_monotone) {
      // Gradient of sum_k exp(<a_k, x>) + 0.1 |x|^2.
      const Points a = gen::points(rng, 3, d);
      v = 0.2 * x;
      for (Eigen::Index k = 0; k < a.rows(); ++k)
        for (Eigen::Index i = 0; i < x.rows(); ++i) v.row(i) += std::exp(a.row(k).dot(x.row(i))) * a.row(k);
    } else {
      do v = gen::points(rng, n, d);
      while (is_monotone(GraphSample(x, v)).ok);
    }
    const SampledVectorField u(mu, v);
    const auto rep = monotone_equivalence_report(u);
    bool ok = rep.agree() && rep.monotone == want_monotone;
    if (want_monotone)
      ok = ok && rep.best_involution == identity(n) && std::abs(rep.lp_value - rep.diagonal_value) <= 1e-9;
    (want_monotone ? monotone_seen : other_seen) += rep.monotone == want_monotone;
    if (!ok)
      failures.push_back({{"instance", t},
                          {"monotone", rep.monotone},
                          {"involution_sup_zero", rep.involution_sup_zero},
                          {"identity_projection", rep.identity_projection},
                          {"lp_diagonal", rep.lp_diagonal}});
  }
  r.pass = failures.empty();
  r.detail = {{"monotone_fields", 20}, {"other_fields", 20}, {"failures", failures}};
  r.summary = fmt("%.0f monotone and %.0f non-monotone fields classified consistently", monotone_seen, other_seen);
  return r;
}

CriterionResult polar_set() {
  CriterionResult r{4, "gradient of a convex function lies in the m-cyclic polar set", true, "", json::object()};
  gen::Rng rng(1004);
  json failures = json::array();
  double worst = 0.0;
  for (int t = 0; t < 10; ++t) {
    const Index n = 3 + static_cast<Index>(t % 4);
    const Index d = 1 + static_cast<Index>(t % 2);
    const auto mu = gen::uniform_measure(rng, n, d);
    // phi(x) = max_k <a_k, x> + b_k; u(x_i) is the active slope.
    const Points a = gen::points(rng, 4, d);
    const Points b = gen::points(rng, 4, 1);
    Points v(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
      Eigen::Index arg = 0;
      double best = -1e300;
      for (Eigen::Index k = 0; k < a.rows(); ++k) {
        const double val = a.row(k).dot(mu.points().row(i)) + b(k, 0);
        if (val > best) best = val, arg = k;
      }
      v.row(i) = a.row(arg);
    }
    const SampledVectorField u(mu, v);
    double diag = 0.0;
    for (Eigen::Index i = 0; i < v.rows(); ++i) diag += v.row(i).dot(mu.points().row(i)) / static_cast<double>(n);
    for (int m : {2, 3}) {
      std::vector<SampledVectorField> fields(static_cast<std::size_t>(m - 1),
                                             SampledVectorField(mu, Points::Zero(v.rows(), v.cols())));
      fields.back() = u;
      const std::vector<Points> supports(static_cast<std::size_t>(m), mu.points());
      const auto sol = solve_sym(vector_field_cost(fields, supports), mu, Sense::Max);
      const double gap = std::abs(sol.primal_value - diag);
      worst = std::max(worst, gap);
      if (gap > 1e-9) failures.push_back({{"instance", t}, {"m", m}, {"lp", sol.primal_value}, {"diagonal", diag}});
    }
  }
  r.pass = failures.empty();
  r.detail = {{"instances", 10}, {"max_gap", worst}, {"failures", failures}};
  r.summary = fmt("10 fields x m in {2,3}, max |LP - diagonal| = %.3g", worst);
  return r;
}

CriterionResult reduction() {
  CriterionResult r{5, "three-marginal reduction identity", true, "", json::object()};
  gen::Rng rng(1005);
  double worst = 0.0;
  for (int pair = 0; pair < 10; ++pair) {
    const Index n = 4;
    const auto mu = gen::uniform_measure(rng, n, 1 + static_cast<Index>(pair % 2));
    const auto u1 = gen::field(rng, mu), u2 = gen::field(rng, mu);
    for (int k = 0; k < 100; ++k) worst = std::max(worst, reduction_identity_residual(u1, u2, gen::admissible_plan(rng, n)));
  }
  r.pass = worst <= 1e-9;
  r.detail = {{"field_pairs", 10}, {"plans_per_pair", 100}, {"max_residual", worst}};
  r.summary = fmt("1000 plans, max |C + 2D - const| = %.3g", worst);
  return r;
}

CriterionResult polar_round_trip() {
  CriterionResult r{6, "polar factorization round trip", true, "", json::object()};
  gen::Rng rng(1006);
  json failures = json::array();
  int cyclic_checks = 0;
  const Index sizes[] = {8, 16, 32, 64};
  for (int t = 0; t < 25; ++t) {
    const Index n = sizes[t % 4];
    const auto mu = gen::uniform_measure(rng, n, 2);
    const auto u = distinct_fields(rng, mu, 1).front();
    const auto q = polar_brenier(u);
    bool ok = is_permutation(q.s.perm);
    for (Index i = 0; i < n; ++i) ok = ok && q.assignment[q.s.perm[i]] == i;
    if (n == 8) {
      Points tx(static_cast<Eigen::Index>(n), 2);
      for (Index i = 0; i < n; ++i) tx.row(static_cast<Eigen::Index>(i)) = u.values().row(static_cast<Eigen::Index>(q.assignment[i]));
      const GraphSample g(mu.points(), tx);
      for (int m = 2; m <= 4; ++m, ++cyclic_checks) ok = ok && is_m_cyclically_monotone(g, m).ok;
    }
    if (!ok) failures.push_back({{"instance", t}, {"n", n}});
  }
  r.pass = failures.empty();
  r.detail = {{"fields", 25}, {"cyclic_checks", cyclic_checks}, {"failures", failures}};
  r.summary = fmt("25 fields, T o S = u on every atom; %.0f exhaustive cyclic checks at n = 8",
                  static_cast<double>(cyclic_checks));
  return r;
}

CriterionResult symmetry() {
  CriterionResult r{7, "symmetry of potentials and of the barycenter", true, "", json::object()};
  gen::Rng rng(1007);
  double transfer = 0.0, transfer3 = 0.0, w2 = 0.0;
  for (int t = 0; t < 10; ++t) {
    // Coordinate swap on R^2: max <x, y> between mu and sigma_# mu.
    const auto mu = gen::measure(rng, 4, 2);
    Points swapped = mu.points();
    swapped.col(0) = mu.points().col(1);
    swapped.col(1) = mu.points().col(0);
    const std::vector<DiscreteMeasure> pair{mu, DiscreteMeasure(swapped, mu.weights())};
    const Eigen::MatrixXd inner = mu.points() * swapped.transpose();
    std::vector<double> v;
    for (Eigen::Index i = 0; i < 4; ++i)
      for (Eigen::Index j = 0; j < 4; ++j) v.push_back(inner(i, j));
    const CostTensor c(TensorShape({4, 4}), v);
    const auto d = extract_duals(solve_mm(c, pair, Sense::Max), c);
    const double shift = d.u[1][0] - d.u[0][0];
    for (Index a = 0; a < 4; ++a) transfer = std::max(transfer, std::abs(d.u[1][a] - d.u[0][a] - shift));
  }
  for (int t = 0; t < 10; ++t) {
    // Block 3-cycle on R^3 (d = 1 blocks) or R^6 (d = 2 blocks).
    const Index dim = t % 2 == 0 ? 3 : 6;
    const auto mu = gen::measure(rng, 4, dim);
    std::vector<DiscreteMeasure> ms;
    std::vector<Points> supports;
    for (int k = 0; k < 3; ++k) {
      ms.push_back(pushforward(mu, [k](const Eigen::VectorXd& x) { return block_cycle(x, k); }));
      supports.push_back(ms.back().points());
    }
    const auto cost = quadratic_cost(supports);
    const auto sol = solve_mm(cost, ms, Sense::Min);
    const auto d = extract_duals(sol, cost);
    for (std::size_t k = 1; k < 3; ++k) {
      const double shift = d.u[k][0] - d.u[0][0];
      for (Index a = 0; a < 4; ++a) transfer3 = std::max(transfer3, std::abs(d.u[k][a] - d.u[0][a] - shift));
    }
    const auto nu = barycenter_measure(symmetrize_plan(sol.plan), supports);
    const auto snu = pushforward(nu, [](const Eigen::VectorXd& x) { return block_cycle(x, 1); });
    w2 = std::max(w2, wasserstein2(nu, snu));
  }
  r.pass = transfer <= 1e-8 && transfer3 <= 1e-8 && w2 <= 1e-10;
  r.detail = {{"swap_transfer_residual", transfer}, {"cycle_transfer_residual", transfer3}, {"max_w2_nu_sigma_nu", w2}};
  r.summary = fmt("potential transfer residual %.3g, max W2(nu, sigma nu) = %.3g", std::max(transfer, transfer3), w2);
  return r;
}

CriterionResult characterization() {
  CriterionResult r{8, "three involution characterizations agree on every permutation", true, "", json::object()};
  std::size_t checked = 0, disagree = 0;
  for (Index n = 1; n <= 6; ++n) {
    Points x(static_cast<Eigen::Index>(n), 1);
    for (Index i = 0; i < n; ++i) x(static_cast<Eigen::Index>(i), 0) = static_cast<double>(i);
    const auto mu = DiscreteMeasure::uniform(x);
    auto p = identity(n);
    do {
      ++checked;
      disagree += !characterization_check(p, mu).agree();
    } while (std::next_permutation(p.begin(), p.end()));
  }
  r.pass = disagree == 0;
  r.detail = {{"permutations", checked}, {"disagreements", disagree}};
  r.summary = fmt("%.0f permutations, %.0f disagreements", static_cast<double>(checked), static_cast<double>(disagree));
  return r;
}

CriterionResult fitzpatrick_sandwich() {
  CriterionResult r{9, "Fitzpatrick closed form and self-dual sandwich", true, "", json::object()};
  std::vector<double> axis(101);
  for (int i = 0; i <= 100; ++i) axis[static_cast<std::size_t>(i)] = -1.0 + 0.02 * i;
  Points x(101, 1);
  for (Eigen::Index i = 0; i < 101; ++i) x(i, 0) = axis[static_cast<std::size_t>(i)];
  const GraphSample sample(x, x);
  const auto n = fitzpatrick_grid(sample, {axis, axis});
  const double tol = grid_tolerance(n);
  double closed = 0.0, graph = 0.0;
  for (std::size_t a = 0; a < axis.size(); ++a)
    for (std::size_t b = 0; b < axis.size(); ++b) {
      const double p = axis[a], y = axis[b];
      const double val = n.values()[a * axis.size() + b];
      closed = std::max(closed, std::abs(val - 0.25 * (p + y) * (p + y)));
      if (a == b) graph = std::max(graph, std::abs(val - p * y));
    }
  const auto ns = conjugate_swapped(n);
  const auto l = selfdual_interpolation(n, ns);
  const auto s = sandwich_check(n, l, ns);
  r.pass = closed <= tol && graph == 0.0 && s.ok;
  r.detail = {{"grid_tolerance", tol},
              {"closed_form_error", closed},
              {"graph_equality_error", graph},
              {"sandwich", {{"ok", s.ok}, {"tolerance", s.tolerance}, {"min_L_minus_N", s.worst_lower}, {"min_Nstar_minus_L", s.worst_upper}}}};
  r.summary = fmt("max |N - (p+x)^2/4| = %.3g against grid tolerance %.3g", closed, tol) +
              (s.ok ? ", sandwich holds" : ", sandwich broken");
  return r;
}

CriterionResult sinkhorn() {
  CriterionResult r{10, "entropic values approach the exact optimum", true, "", json::object()};
  gen::Rng rng(1010);
  const double eps[] = {1.0, 0.1, 0.01};
  json runs = json::array();
  for (int t = 0; t < 5; ++t) {
    const std::vector<DiscreteMeasure> ms{gen::measure(rng, 4, 1), gen::measure(rng, 4, 1)};
    const auto cost = gen::cost(rng, {4, 4});
    const auto [lo, hi] = cost.range();
    const double exact = solve_mm(cost, ms, Sense::Min).primal_value;
    std::vector<double> gaps;
    double slack = 0.0;
    for (double e : eps) {
      const auto s = sinkhorn_mm(cost, ms, e, 1e-10, 20000);
      gaps.push_back(s.value - exact);
      slack = std::max(slack, s.marginal_violation * (hi - lo));
    }
    bool ok = gaps.back() <= 0.05 * (hi - lo) && gaps.back() >= -slack - 1e-12;
    for (std::size_t k = 1; k < gaps.size(); ++k) ok = ok && gaps[k] <= gaps[k - 1] + slack + 1e-12;
    r.pass = r.pass && ok;
    runs.push_back({{"exact", exact}, {"gaps", gaps}, {"cost_range", hi - lo}, {"ok", ok}});
  }
  r.detail = {{"epsilons", eps}, {"runs", runs}};
  double last = 0.0;
  for (const auto& run : runs) last = std::max(last, run["gaps"].back().get<double>() / run["cost_range"].get<double>());
  r.summary = fmt("5 instances, largest final gap %.3g of the cost range", last);
  return r;
}

}  // namespace

CriterionResult run_criterion(int id) {
  switch (id) {
    case 1: return strong_duality();
    case 2: return symmetric_attainment();
    case 3: return monotone_equivalence();
    case 4: return polar_set();
    case 5: return reduction();
    case 6: return polar_round_trip();
    case 7: return symmetry();
    case 8: return characterization();
    case 9: return fitzpatrick_sandwich();
    case 10: return sinkhorn();
    default: throw Error(ErrorCode::InvalidArgument, "no acceptance criterion " + std::to_string(id));
  }
}

}  // namespace mmot::acceptance
