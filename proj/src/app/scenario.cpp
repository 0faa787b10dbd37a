#include "mmot/app/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <thread>

#include "mmot/app/acceptance.hpp"
#include "mmot/app/generate.hpp"
#include "mmot/assignment.hpp"
#include "mmot/duality.hpp"
#include "mmot/error.hpp"
#include "mmot/involution.hpp"
#include "mmot/monotone.hpp"
#include "mmot/transport.hpp"

namespace fs = std::filesystem;

namespace mmot::scenario {

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::InputError, what); }

const std::set<std::string> kOps{"eq", "approx", "le", "ge", "lt", "gt"};

// ---- inputs ---------------------------------------------------------------

// Resolves "inputs" entries: a string is a path relative to the scenario,
// an object is inline data. Generated data ("random") is drawn once, in a
// fixed order: base measure, then fields, then extra measures.
class Inputs {
 public:
  explicit Inputs(const Scenario& s) : s_(s), rng_(s.seed) {
    if (!s.inputs.contains("random")) return;
    const auto& r = s.inputs.at("random");
    const auto n = r.value("n", Index{4}), d = r.value("d", Index{1});
    base_ = gen::uniform_measure(rng_, n, d);
    for (int k = 0; k < r.value("fields", 0); ++k) random_fields_.push_back(gen::field(rng_, *base_));
    for (int k = 0; k < r.value("measures", 0); ++k) random_measures_.push_back(gen::measure(rng_, n, d));
  }

  bool has(const char* key) const { return s_.inputs.contains(key); }
  gen::Rng& rng() { return rng_; }

  DiscreteMeasure measure() {
    if (has("measure"))
      return resolve<DiscreteMeasure>(s_.inputs.at("measure"), "measure", io::load_measure, io::measure_from_json);
    if (base_) return *base_;
    if (has("field") || has("fields")) return fields().front().base();
    bad("scenario needs inputs.measure");
  }

  std::vector<DiscreteMeasure> measures() {
    std::vector<DiscreteMeasure> out;
    if (has("measures")) {
      const auto& list = s_.inputs.at("measures");
      if (!list.is_array()) bad("inputs.measures must be an array");
      for (const auto& m : list)
        out.push_back(resolve<DiscreteMeasure>(m, "measures", io::load_measure, io::measure_from_json));
    } else {
      out = random_measures_;
    }
    if (out.empty()) bad("scenario needs inputs.measures");
    return out;
  }

  bool has_fields() const { return has("field") || has("fields") || !random_fields_.empty(); }

  std::vector<SampledVectorField> fields() {
    std::vector<SampledVectorField> out;
    auto load = [&](const json& v) {
      out.push_back(resolve<SampledVectorField>(
          v, "fields", [&](const fs::path& p) { return io::load_field(p); },
          [&](const json& j) { return io::field_from_json(j, s_.dir); }));
    };
    if (has("field")) load(s_.inputs.at("field"));
    if (has("fields")) {
      const auto& list = s_.inputs.at("fields");
      if (!list.is_array()) bad("inputs.fields must be an array");
      for (const auto& f : list) load(f);
    }
    if (out.empty()) out = random_fields_;
    if (out.empty()) bad("scenario needs inputs.field or inputs.fields");
    return out;
  }

  SampledVectorField field() {
    auto f = fields();
    if (f.size() != 1) bad("scenario needs exactly one field");
    return f.front();
  }

  CostTensor cost() { return resolve<CostTensor>(s_.inputs.at("cost"), "cost", io::load_cost, io::cost_from_json); }
  GridFunction grid() {
    if (!has("grid")) bad("scenario needs inputs.grid");
    return resolve<GridFunction>(s_.inputs.at("grid"), "grid", io::load_grid, io::grid_from_json);
  }
  CouplingPlan plan() { return resolve<CouplingPlan>(s_.inputs.at("plan"), "plan", io::load_plan, io::plan_from_json); }

 private:
  template <class T, class Load, class Inline>
  T resolve(const json& v, const char* key, Load&& load, Inline&& inl) {
    if (v.is_string()) return load(s_.dir / v.get<std::string>());
    try {
      return inl(v);
    } catch (const Error& e) {
      bad(std::string("inputs.") + key + ": " + e.what());
    } catch (const json::exception& e) {
      bad(std::string("inputs.") + key + ": " + e.what());
    }
  }

  const Scenario& s_;
  gen::Rng rng_;
  std::optional<DiscreteMeasure> base_;
  std::vector<SampledVectorField> random_fields_;
  std::vector<DiscreteMeasure> random_measures_;
};

template <class T>
T opt(const json& o, const char* key, T fallback) {
  if (!o.contains(key)) return fallback;
  try {
    return o.at(key).get<T>();
  } catch (const json::exception&) {
    bad(std::string("options.") + key + " has the wrong type");
  }
}

struct Context {
  const Scenario& s;
  Inputs in;
  double tol;
  std::optional<CouplingPlan> plan;  // written as <name>.plan.csv
};

std::vector<double> linspace(const json& axis) {
  if (!axis.is_array() || axis.size() != 3) bad("grid axes are given as [lo, hi, nodes]");
  const double lo = axis[0].get<double>(), hi = axis[1].get<double>();
  const int nodes = axis[2].get<int>();
  if (nodes < 2 || !(hi > lo)) bad("grid axis needs lo < hi and at least two nodes");
  std::vector<double> a(static_cast<std::size_t>(nodes));
  for (int i = 0; i < nodes; ++i) a[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (nodes - 1);
  return a;
}

std::vector<Points> supports_of(const std::vector<DiscreteMeasure>& ms) {
  std::vector<Points> out;
  for (const auto& m : ms) out.push_back(m.points());
  return out;
}

json cycles_json(const Permutation& p) { return json(cycles(p)); }

json solve_json(const SolveResult& r, const CostTensor& cost) {
  json out{{"method", r.method},
           {"sense", std::string(to_string(r.sense))},
           {"value", r.primal_value},
           {"dual_value", r.dual_value},
           {"gap", r.gap},
           {"iterations", r.iterations},
           {"certificate", io::to_json(certify(r, cost))},
           {"potentials", io::to_json(extract_duals(r, cost))}};
  const auto g = graph_test(r.plan, 1.0);
  out["monge"] = {{"concentration", g.concentration}, {"is_graph", g.is_graph()}};
  if (g.maps) out["monge"]["maps"] = *g.maps;
  return out;
}

json polar_json(const PolarResult& p) {
  json out{{"involution", p.s.perm},
           {"m", p.s.m},
           {"cycles", cycles_json(p.s.perm)},
           {"objective", p.objective},
           {"lp_bound", p.lp_bound},
           {"certificate_gap", p.certificate_gap},
           {"note", p.note}};
  if (!p.assignment.empty()) out["assignment"] = p.assignment;
  return out;
}

// ---- subcommands ----------------------------------------------------------

json solve_mm_cmd(Context& c) {
  const auto ms = c.in.measures();
  const auto supports = supports_of(ms);
  CostTensor cost;
  std::string kind = "quadratic";
  if (c.in.has("cost")) {
    cost = c.in.cost();
    kind = "file";
  } else if (c.in.has_fields()) {
    const auto f = c.in.fields();
    if (f.size() + 1 != ms.size()) bad("vector-field cost needs one field per marginal after the first");
    cost = vector_field_cost(f, supports);
    kind = "vector-field";
  } else {
    cost = quadratic_cost(supports);
  }
  SolveOptions so;
  so.allow_assignment = opt(c.s.options, "allow_assignment", true);
  const auto r = solve_mm(cost, ms, parse_sense(opt<std::string>(c.s.options, "sense", "min")), so);
  c.plan = r.plan;
  auto out = solve_json(r, cost);
  out["cost"] = kind;
  return out;
}

json solve_sym_cmd(Context& c) {
  const auto mu = c.in.measure();
  CostTensor cost;
  std::optional<std::vector<SampledVectorField>> fields;
  std::string kind = "quadratic";
  if (c.in.has("cost")) {
    cost = c.in.cost();
    kind = "file";
  } else if (c.in.has_fields()) {
    fields = c.in.fields();
    const std::vector<Points> supports(fields->size() + 1, mu.points());
    cost = vector_field_cost(*fields, supports);
    kind = "vector-field";
  } else {
    const int m = opt(c.s.options, "m", 2);
    if (m < 2) bad("options.m must be at least 2");
    cost = quadratic_cost(std::vector<Points>(static_cast<std::size_t>(m), mu.points()));
  }
  const auto r = solve_sym(cost, mu, parse_sense(opt<std::string>(c.s.options, "sense", "max")));
  c.plan = r.plan;
  auto out = solve_json(r, cost);
  out["cost"] = kind;
  if (fields && mu.is_uniform() && mu.size() <= kInvolutionEnumCap && r.sense == Sense::Max) {
    const int m = static_cast<int>(fields->size()) + 1;
    const auto best = best_involution(*fields, m, SearchMode::Exhaustive);
    out["involution"] = best.s.perm;
    out["involution_objective"] = best.objective;
    out["attained"] = std::abs(best.objective - r.primal_value) <= c.tol;
  }
  return out;
}

json assign_cmd(Context& c) {
  Eigen::MatrixXd mat;
  if (c.in.has("cost")) {
    const auto cost = c.in.cost();
    if (cost.arity() != 2 || cost.shape().size(0) != cost.shape().size(1))
      bad("assign needs a square two-way cost");
    const auto n = static_cast<Eigen::Index>(cost.shape().size(0));
    mat.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) mat(i, j) = cost.values()[static_cast<std::size_t>(i * n + j)];
  } else {
    const auto ms = c.in.measures();
    if (ms.size() != 2 || ms[0].size() != ms[1].size()) bad("assign needs two measures of equal size");
    const auto& x = ms[0].points();
    const auto& y = ms[1].points();
    mat.resize(x.rows(), y.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      for (Eigen::Index j = 0; j < y.rows(); ++j) mat(i, j) = (x.row(i) - y.row(j)).squaredNorm();
  }
  const auto sense = parse_sense(opt<std::string>(c.s.options, "sense", "min"));
  const auto a = solve_assignment(mat, sense);
  return {{"sense", std::string(to_string(sense))},
          {"perm", a.perm},
          {"value", a.value},
          {"row_potential", a.row_potential},
          {"col_potential", a.col_potential}};
}

json wasserstein_cmd(Context& c) {
  const auto ms = c.in.measures();
  if (ms.size() != 2) bad("wasserstein needs exactly two measures");
  return {{"value", wasserstein2(ms[0], ms[1])}};
}

json involution_cmd(Context& c) {
  const auto f = c.in.fields();
  const auto mode = parse_search_mode(opt<std::string>(c.s.options, "mode", "exhaustive"));
  const int m = static_cast<int>(f.size()) + 1;
  const auto r = best_involution(f, m, mode, c.s.seed);
  auto out = polar_json(r);
  out["mode"] = std::string(to_string(mode));
  out["order"] = permutation_order(r.s.perm);
  return out;
}

json cyclic_json(const GraphSample& g, int m, const Context& c) {
  std::uint64_t total = 1;
  bool exhaustive = true;
  for (int k = 0; k < m && exhaustive; ++k) {
    total *= static_cast<std::uint64_t>(g.size());
    exhaustive = total <= kCyclicCap;
  }
  const auto mode = exhaustive ? CyclicMode::Exhaustive : CyclicMode::Random;
  const auto r = is_m_cyclically_monotone(g, m, mode, opt<std::uint64_t>(c.s.options, "trials", 10000), c.s.seed);
  return {{"m", m},
          {"mode", exhaustive ? "exhaustive" : "random"},
          {"ok", r.ok},
          {"worst_cycle", r.worst_cycle},
          {"worst_value", r.worst_value},
          {"tuples", r.tuples}};
}

json polar_brenier_cmd(Context& c) {
  const auto u = c.in.field();
  const auto q = polar_brenier(u);
  bool exact = true;
  for (Index i = 0; i < u.size(); ++i) exact = exact && q.assignment[q.s.perm[i]] == i;
  Points tx(u.values().rows(), u.values().cols());
  for (Index i = 0; i < u.size(); ++i)
    tx.row(static_cast<Eigen::Index>(i)) = u.values().row(static_cast<Eigen::Index>(q.assignment[i]));
  const GraphSample g(u.base().points(), tx);
  json cyc = json::array();
  for (int m = 2; m <= opt(c.s.options, "max_cyclic_m", 2); ++m) cyc.push_back(cyclic_json(g, m, c));
  json out{{"S", q.s.perm},
           {"T", q.assignment},
           {"objective", q.objective},
           {"lp_bound", q.lp_bound},
           {"certificate_gap", q.certificate_gap},
           {"round_trip_exact", exact},
           {"T_cyclic", cyc}};
  return out;
}

json polar_hamiltonian_cmd(Context& c) {
  const auto f = c.in.fields();
  const auto mode = parse_search_mode(opt<std::string>(c.s.options, "mode", "exhaustive"));
  const auto h = polar_hamiltonian(f, static_cast<int>(f.size()) + 1, mode, c.s.seed);
  auto out = polar_json(h.polar);
  out["mode"] = std::string(to_string(mode));
  out["potentials"] = io::to_json(h.potentials);
  out["graph_residuals"] = h.graph_residuals;
  out["max_residual"] = h.max_residual;
  out["slackness_holds"] = h.slackness_holds;
  return out;
}

json check_monotone_cmd(Context& c) {
  const auto u = c.in.field();
  const auto pairs = is_monotone(GraphSample::of(u));
  json out{{"monotone", pairs.ok}, {"worst_value", pairs.worst_value}};
  out["worst_pair"] = pairs.worst ? json{pairs.worst->first, pairs.worst->second} : json(nullptr);
  if (!u.base().is_uniform() || u.size() > kEquivalenceCap) {
    out["all_four_equivalent"] = nullptr;
    out["note"] = "equivalence report needs uniform weights and n <= " + std::to_string(kEquivalenceCap);
    return out;
  }
  const auto r = monotone_equivalence_report(u);
  out["involution_sup_zero"] = r.involution_sup_zero;
  out["identity_projection"] = r.identity_projection;
  out["lp_diagonal"] = r.lp_diagonal;
  out["all_four_equivalent"] = r.agree();
  out["involution_sup"] = r.involution_sup;
  out["best_involution"] = r.best_involution;
  out["projection_gap"] = r.projection_gap;
  out["lp_value"] = r.lp_value;
  out["diagonal_value"] = r.diagonal_value;
  return out;
}

json check_cyclic_cmd(Context& c) {
  const auto g = GraphSample::of(c.in.field());
  const int m = opt(c.s.options, "m", 2);
  const auto mode = opt<std::string>(c.s.options, "mode", "exhaustive");
  if (mode != "exhaustive" && mode != "random") bad("options.mode must be \"exhaustive\" or \"random\"");
  const auto r = is_m_cyclically_monotone(g, m, mode == "random" ? CyclicMode::Random : CyclicMode::Exhaustive,
                                          opt<std::uint64_t>(c.s.options, "trials", 10000), c.s.seed);
  return {{"m", m},
          {"mode", mode},
          {"ok", r.ok},
          {"worst_cycle", r.worst_cycle},
          {"worst_value", r.worst_value},
          {"tuples", r.tuples}};
}

json fitzpatrick_cmd(Context& c) {
  const auto u = c.in.field();
  const GraphSample g = GraphSample::of(u);
  std::vector<std::vector<double>> axes;
  if (c.in.has("grid")) {
    axes = c.in.grid().axes();
  } else if (c.s.options.contains("axes")) {
    for (const auto& a : c.s.options.at("axes")) axes.push_back(linspace(a));
  } else {
    bad("fitzpatrick needs options.axes or inputs.grid");
  }
  const auto n = fitzpatrick_grid(g, axes);
  const double tol = grid_tolerance(n);
  double graph = 0.0;
  for (Index k = 0; k < u.size(); ++k) {
    const Vector x = u.base().point(k), p = u.value(k);
    graph = std::max(graph, std::abs(fitzpatrick(g, p, x) - x.dot(p)));
  }
  json out{{"grid_nodes", n.shape().total()},
           {"grid_tolerance", tol},
           {"monotone", is_monotone(g).ok},
           {"graph_equality_error", graph},
           {"converse", "not decidable from samples"}};
  if (opt<std::string>(c.s.options, "closed_form", "") == "identity") {
    if (axes.size() != 2) bad("the identity closed form is one-dimensional");
    const double lo = u.base().points().minCoeff(), hi = u.base().points().maxCoeff();
    double err = 0.0;
    for (std::size_t a = 0; a < axes[0].size(); ++a)
      for (std::size_t b = 0; b < axes[1].size(); ++b) {
        const double p = axes[0][a], x = axes[1][b], mid = 0.5 * (p + x);
        if (mid < lo || mid > hi) continue;  // sup not attained inside the sample
        err = std::max(err, std::abs(n.values()[a * axes[1].size() + b] - mid * mid));
      }
    out["closed_form_error"] = err;
    out["closed_form_ok"] = err <= tol;
  }
  if (opt(c.s.options, "sandwich", true)) {
    const auto ns = conjugate_swapped(n);
    const auto l = selfdual_interpolation(n, ns);
    const auto s = sandwich_check(n, l, ns);
    out["sandwich"] = {{"ok", s.ok},
                       {"tolerance", s.tolerance},
                       {"min_L_minus_N", s.worst_lower},
                       {"min_Nstar_minus_L", s.worst_upper}};
  }
  return out;
}

json legendre_cmd(Context& c) {
  const auto l = c.in.grid();
  const std::size_t half = l.dims() / 2;
  const auto first = opt<std::size_t>(c.s.options, "first", l.dims() == 1 ? 0 : half);
  const auto count = opt<std::size_t>(c.s.options, "count", l.dims() == 1 ? 1 : l.dims() - half);
  std::optional<std::vector<std::vector<double>>> out_axes;
  if (c.s.options.contains("out_axes")) {
    out_axes.emplace();
    for (const auto& a : c.s.options.at("out_axes")) out_axes->push_back(linspace(a));
  }
  const auto k = partial_legendre(l, first, count, out_axes);
  json out{{"first", first}, {"count", count}, {"grid_tolerance", grid_tolerance(l)}, {"result", io::to_json(k)}};
  if (opt(c.s.options, "round_trip", false)) {
    std::vector<std::vector<double>> back(l.axes().begin() + static_cast<std::ptrdiff_t>(first),
                                          l.axes().begin() + static_cast<std::ptrdiff_t>(first + count));
    const auto twice = partial_legendre(k, first, count, back);
    double above = -1e300, dev = 0.0;
    for (std::size_t f = 0; f < twice.values().size(); ++f) {
      above = std::max(above, twice.values()[f] - l.values()[f]);
      dev = std::max(dev, std::abs(twice.values()[f] - l.values()[f]));
    }
    out["round_trip"] = {{"max_excess", above}, {"max_deviation", dev}};
  }
  if (opt(c.s.options, "antisymmetrize", false)) {
    const auto h = antisymmetrize(k);
    double asym = 0.0;
    IndexTuple idx(h.dims(), 0), sw(h.dims());
    const std::size_t d = h.dims() / 2;
    do {
      for (std::size_t i = 0; i < d; ++i) sw[i] = idx[d + i], sw[d + i] = idx[i];
      asym = std::max(asym, std::abs(h.at(idx) + h.at(sw)));
    } while (next_tuple(idx, h.shape().sizes()));
    out["antisymmetric"] = io::to_json(h);
    out["antisymmetry_error"] = asym;
  }
  return out;
}

json reduction_cmd(Context& c) {
  const auto f = c.in.fields();
  if (f.size() != 2) bad("reduction-check needs two fields");
  std::vector<CouplingPlan> plans;
  if (c.in.has("plan")) {
    plans.push_back(c.in.plan());
  } else {
    const int count = opt(c.s.options, "plans", 100);
    for (int k = 0; k < count; ++k) plans.push_back(gen::admissible_plan(c.in.rng(), f[0].size()));
  }
  double worst = 0.0;
  std::size_t arg = 0;
  for (std::size_t k = 0; k < plans.size(); ++k) {
    const double r = reduction_identity_residual(f[0], f[1], plans[k]);
    if (r > worst) worst = r, arg = k;
  }
  const auto first = reduction_identity(f[0], f[1], plans.front());
  return {{"plans", plans.size()},
          {"residual", worst},
          {"worst_plan", arg},
          {"first_plan", {{"C", first.quadratic_objective}, {"D", first.symmetric_objective}, {"constant", first.constant}}}};
}

json barycenter_cmd(Context& c) {
  std::vector<DiscreteMeasure> ms;
  const bool cycle = opt(c.s.options, "block_cycle", false);
  if (cycle) {
    const auto mu = c.in.measure();
    for (int k = 0; k < 3; ++k)
      ms.push_back(pushforward(mu, [k](const Eigen::VectorXd& x) { return block_cycle(x, k); }));
  } else {
    ms = c.in.measures();
  }
  const auto supports = supports_of(ms);
  const auto cost = quadratic_cost(supports);
  const auto r = solve_mm(cost, ms, Sense::Min);
  const bool sym = opt(c.s.options, "symmetrize", cycle);
  const auto plan = sym ? symmetrize_plan(r.plan) : r.plan;
  c.plan = plan;
  const auto nu = barycenter_measure(plan, supports);
  json out{{"value", r.primal_value}, {"symmetrized", sym}, {"nu", io::to_json(nu)}};
  if (cycle)
    out["sigma_w2"] = wasserstein2(nu, pushforward(nu, [](const Eigen::VectorXd& x) { return block_cycle(x, 1); }));
  return out;
}

json acceptance_cmd(Context& c) {
  if (!c.s.options.contains("criterion")) bad("acceptance needs options.criterion");
  const auto r = acceptance::run_criterion(opt(c.s.options, "criterion", 0));
  return {{"criterion", r.id}, {"title", r.title}, {"pass", r.pass}, {"summary", r.summary}, {"detail", r.detail}};
}

using Handler = json (*)(Context&);

const std::map<std::string, Handler>& handlers() {
  static const std::map<std::string, Handler> h{
      {"solve-mm", solve_mm_cmd},
      {"solve-sym", solve_sym_cmd},
      {"assign", assign_cmd},
      {"wasserstein", wasserstein_cmd},
      {"involution-search", involution_cmd},
      {"polar-brenier", polar_brenier_cmd},
      {"polar-hamiltonian", polar_hamiltonian_cmd},
      {"check-monotone", check_monotone_cmd},
      {"check-cyclic", check_cyclic_cmd},
      {"fitzpatrick", fitzpatrick_cmd},
      {"legendre", legendre_cmd},
      {"reduction-check", reduction_cmd},
      {"barycenter", barycenter_cmd},
      {"acceptance", acceptance_cmd},
  };
  return h;
}

// ---- checks ---------------------------------------------------------------

bool approx(const json& a, const json& b, double tol) {
  if (a.is_number() && b.is_number()) return std::abs(a.get<double>() - b.get<double>()) <= tol;
  if (a.is_array() && b.is_array() && a.size() == b.size()) {
    for (std::size_t i = 0; i < a.size(); ++i)
      if (!approx(a[i], b[i], tol)) return false;
    return true;
  }
  return a == b;
}

json evaluate(const json& check, const json& result, double tol, std::vector<std::string>& messages) {
  const auto path = check.at("path").get<std::string>();
  const auto op = check.at("op").get<std::string>();
  const json expected = check.value("value", json(nullptr));
  const double t = check.value("tol", tol);
  json row{{"path", path}, {"op", op}, {"expected", expected}};
  if (op == "approx") row["tol"] = t;
  const json::json_pointer ptr(path);
  bool pass = false;
  if (!result.contains(ptr)) {
    row["actual"] = nullptr;
    messages.push_back("check " + path + ": not present in the result");
  } else {
    const json& actual = result.at(ptr);
    row["actual"] = actual;
    if (op == "eq") {
      pass = actual == expected;
    } else if (op == "approx") {
      pass = approx(actual, expected, t);
    } else if (actual.is_number() && expected.is_number()) {
      const double a = actual.get<double>(), e = expected.get<double>();
      pass = (op == "le" && a <= e) || (op == "ge" && a >= e) || (op == "lt" && a < e) || (op == "gt" && a > e);
    }
    if (!pass) messages.push_back("check " + path + " " + op + " " + expected.dump() + " failed: got " + actual.dump());
  }
  row["pass"] = pass;
  return row;
}

bool valid_name(const std::string& n) {
  if (n.empty() || n[0] == '.') return false;
  return std::all_of(n.begin(), n.end(),
                     [](char ch) { return std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_' || ch == '.'; });
}

json tolerances(double tol) {
  return {{"report", tol},
          {"monotone", kMonotoneTol},
          {"slackness", kSlackTol},
          {"support_mass", kSupportMass},
          {"marginal", kMarginalTol},
          {"weight_sum", kWeightSumTol}};
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [k, h] : handlers()) v.push_back(k);
    return v;
  }();
  return names;
}

Scenario from_json(const json& config, const fs::path& dir, const std::string& origin) {
  auto fail = [&](const std::string& what) -> Scenario { bad(origin + ": " + what); };
  if (!config.is_object()) return fail("scenario must be a JSON object");
  Scenario s;
  s.dir = dir;
  try {
    s.name = config.at("name").get<std::string>();
    s.subcommand = config.at("subcommand").get<std::string>();
  } catch (const json::exception&) {
    return fail("scenario needs string fields \"name\" and \"subcommand\"");
  }
  if (!valid_name(s.name)) return fail("scenario name \"" + s.name + "\" is not a safe file name");
  if (!handlers().count(s.subcommand)) return fail("unknown subcommand \"" + s.subcommand + "\"");
  s.inputs = config.value("inputs", json::object());
  s.options = config.value("options", json::object());
  s.checks = config.value("checks", json::array());
  if (!s.inputs.is_object() || !s.options.is_object() || !s.checks.is_array())
    return fail("inputs and options must be objects, checks an array");
  if (s.options.contains("seed")) {
    const auto& seed = s.options.at("seed");
    const bool ok = seed.is_number_unsigned() || (seed.is_number_integer() && seed.get<std::int64_t>() >= 0);
    if (!ok) return fail("options.seed must be an unsigned 64-bit integer");
    s.seed = s.options.at("seed").get<std::uint64_t>();
  }
  for (const auto& c : s.checks) {
    if (!c.is_object() || !c.contains("path") || !c.contains("op") || !c.at("path").is_string() || !c.at("op").is_string())
      return fail("every check needs string \"path\" and \"op\"");
    if (!kOps.count(c.at("op").get<std::string>())) return fail("unknown check op \"" + c.at("op").get<std::string>() + "\"");
    try {
      (void)json::json_pointer(c.at("path").get<std::string>());
    } catch (const json::exception&) {
      return fail("check path \"" + c.at("path").get<std::string>() + "\" is not a JSON pointer");
    }
  }
  s.config_hash = io::hex64(io::fnv1a64(config.dump()));
  return s;
}

Scenario load(const fs::path& path) { return from_json(io::read_json(path), path.parent_path(), path.string()); }

Outcome run(const Scenario& s, const RunConfig& cfg) {
  Outcome o;
  o.name = s.name;
  json report{{"toolkit", "mmot"},
              {"version", kVersion},
              {"scenario", s.name},
              {"subcommand", s.subcommand},
              {"config_hash", s.config_hash},
              {"seed", s.seed},
              {"tolerances", tolerances(cfg.tol)}};
  json result;
  std::optional<CouplingPlan> plan;
  try {
    Context ctx{s, Inputs(s), cfg.tol, std::nullopt};
    result = handlers().at(s.subcommand)(ctx);
    plan = std::move(ctx.plan);
  } catch (const std::exception& e) {
    o.exit_code = kInputError;
    o.messages.push_back(e.what());
    report["status"] = "error";
    report["error"] = e.what();
  }
  if (o.exit_code == kPass) {
    json rows = json::array();
    for (const auto& c : s.checks) rows.push_back(evaluate(c, result, cfg.tol, o.messages));
    o.exit_code = o.messages.empty() ? kPass : kCheckFailed;
    report["result"] = std::move(result);
    report["checks"] = std::move(rows);
    report["status"] = o.exit_code == kPass ? "pass" : "fail";
  }
  try {
    fs::create_directories(cfg.out_dir);
    io::write_text(cfg.out_dir / (s.name + ".report.json"), report.dump(2) + "\n");
    if (plan) io::write_text(cfg.out_dir / (s.name + ".plan.csv"), io::plan_csv(*plan));
  } catch (const std::exception& e) {
    o.exit_code = kInputError;
    o.messages.push_back(e.what());
  }
  o.report = std::move(report);
  return o;
}

Outcome run_file(const fs::path& path, const RunConfig& cfg) {
  Scenario s;
  try {
    s = load(path);
  } catch (const std::exception& e) {
    Outcome o;
    o.name = path.stem().string();
    o.exit_code = kInputError;
    o.messages.push_back(e.what());
    return o;
  }
  return run(s, cfg);
}

SuiteSummary regression_suite(const fs::path& dir, const RunConfig& cfg, unsigned workers) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) bad(dir.string() + ": not a directory");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());

  SuiteSummary sum;
  sum.outcomes.resize(files.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < files.size(); i = next++) sum.outcomes[i] = run_file(files[i], cfg);
  };
  const unsigned k = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(files.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < k; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  // Two scenarios writing the same report would race; flag both.
  std::map<std::string, std::size_t> seen;
  for (std::size_t i = 0; i < files.size(); ++i) {
    auto& o = sum.outcomes[i];
    if (auto [it, fresh] = seen.emplace(o.name, i); !fresh) {
      o.exit_code = kInputError;
      o.messages.push_back(files[i].string() + ": duplicate scenario name \"" + o.name + "\"");
    }
  }
  for (const auto& o : sum.outcomes) {
    sum.passed += o.exit_code == kPass;
    sum.failed += o.exit_code == kCheckFailed;
    sum.errors += o.exit_code == kInputError;
    sum.exit_code = std::max(sum.exit_code, o.exit_code);
  }
  return sum;
}

}  // namespace mmot::scenario
