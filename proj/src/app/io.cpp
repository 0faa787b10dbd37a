#include "mmot/app/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "mmot/error.hpp"

namespace mmot::io {

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::InputError, what); }

Points matrix_from_json(const json& rows, const char* what) {
  if (!rows.is_array() || rows.empty()) bad(std::string(what) + " must be a non-empty array of rows");
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto d = static_cast<Eigen::Index>(rows[0].is_array() ? rows[0].size() : 1);
  Points m(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = rows[static_cast<std::size_t>(i)];
    if (r.is_number()) {  // bare numbers are accepted for 1-d data
      if (d != 1) bad(std::string(what) + " mixes scalars and rows");
      m(i, 0) = r.get<double>();
      continue;
    }
    if (!r.is_array() || static_cast<Eigen::Index>(r.size()) != d)
      bad(std::string(what) + " row " + std::to_string(i) + " has the wrong length");
    for (Eigen::Index k = 0; k < d; ++k) m(i, k) = r[static_cast<std::size_t>(k)].get<double>();
  }
  return m;
}

json matrix_to_json(const Points& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) r.push_back(m(i, k));
    rows.push_back(std::move(r));
  }
  return rows;
}

const json& member(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) bad(std::string("missing \"") + key + "\"");
  return j.at(key);
}

template <class F>
auto with_path(const std::filesystem::path& path, F&& f) {
  try {
    return f(read_json(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InputError && std::string(e.what()).find(path.string()) != std::string::npos) throw;
    throw Error(ErrorCode::InputError, path.string() + ": " + e.what());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InputError, path.string() + ": " + e.what());
  }
}

}  // namespace

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) bad(path.string() + ": cannot open");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    bad(path.string() + ": " + e.what());
  }
}

DiscreteMeasure measure_from_json(const json& j) {
  const Points pts = matrix_from_json(member(j, "points"), "points");
  if (!j.contains("weights")) return DiscreteMeasure::uniform(pts);
  const auto& w = j.at("weights");
  if (!w.is_array()) bad("weights must be an array");
  Vector v(static_cast<Eigen::Index>(w.size()));
  for (std::size_t i = 0; i < w.size(); ++i) v[static_cast<Eigen::Index>(i)] = w[i].get<double>();
  return {pts, v};
}

json to_json(const DiscreteMeasure& mu) {
  json w = json::array();
  for (Eigen::Index i = 0; i < mu.weights().size(); ++i) w.push_back(mu.weights()[i]);
  return {{"points", matrix_to_json(mu.points())}, {"weights", w}};
}

SampledVectorField field_from_json(const json& j, const std::filesystem::path& dir) {
  const auto& m = member(j, "measure");
  DiscreteMeasure base = m.is_string() ? load_measure(dir / m.get<std::string>()) : measure_from_json(m);
  return {std::move(base), matrix_from_json(member(j, "values"), "values")};
}

json to_json(const SampledVectorField& u) {
  return {{"measure", to_json(u.base())}, {"values", matrix_to_json(u.values())}};
}

CouplingPlan plan_from_json(const json& j) {
  const auto m = member(j, "arity").get<std::size_t>();
  const auto& rows = member(j, "entries");
  if (m == 0 || !rows.is_array()) bad("plan needs a positive arity and an entry list");
  std::vector<Index> sizes(m, 0);
  if (j.contains("shape")) {
    sizes = j.at("shape").get<std::vector<Index>>();
    if (sizes.size() != m) bad("plan shape does not match its arity");
  }
  std::vector<std::pair<IndexTuple, double>> raw;
  for (const auto& r : rows) {
    if (!r.is_array() || r.size() != m + 1) bad("plan entries need " + std::to_string(m + 1) + " numbers");
    IndexTuple t(m);
    for (std::size_t k = 0; k < m; ++k) {
      t[k] = r[k].get<Index>();
      if (!j.contains("shape")) sizes[k] = std::max(sizes[k], t[k] + 1);
    }
    raw.emplace_back(std::move(t), r[m].get<double>());
  }
  TensorShape shape(sizes);
  std::vector<CouplingPlan::Entry> entries;
  for (const auto& [t, mass] : raw) {
    for (std::size_t k = 0; k < m; ++k)
      if (t[k] >= sizes[k]) bad("plan entry index outside the declared shape");
    entries.emplace_back(shape.flat(t), mass);
  }
  return CouplingPlan::from_entries(std::move(shape), std::move(entries));
}

json to_json(const CouplingPlan& plan) {
  json entries = json::array();
  IndexTuple idx(plan.arity());
  plan.for_each([&](std::uint64_t f, double mass) {
    plan.shape().unflat(f, idx);
    json row(idx);
    row.push_back(mass);
    entries.push_back(std::move(row));
  });
  return {{"arity", plan.arity()}, {"shape", plan.shape().sizes()}, {"entries", entries}};
}

GridFunction grid_from_json(const json& j) {
  return {member(j, "axes").get<std::vector<std::vector<double>>>(), member(j, "values").get<std::vector<double>>()};
}

json to_json(const GridFunction& g) { return {{"axes", g.axes()}, {"values", g.values()}}; }

CostTensor cost_from_json(const json& j) {
  TensorShape shape(member(j, "shape").get<std::vector<Index>>());
  auto values = member(j, "values").get<std::vector<double>>();
  if (values.size() != shape.total())
    bad("cost has " + std::to_string(values.size()) + " values for " + std::to_string(shape.total()) + " entries");
  return {std::move(shape), std::move(values)};
}

json to_json(const CostTensor& c) {
  if (!c.is_dense()) bad("only dense costs serialize");
  return {{"shape", c.shape().sizes()}, {"values", c.values()}};
}

json to_json(const Certificate& cert) {
  json v = json::array();
  for (const auto& s : cert.violations) v.push_back({{"tuple", s.tuple}, {"mass", s.mass}, {"residual", s.residual}});
  return {{"primal", cert.primal},
          {"dual", cert.dual},
          {"gap", cert.gap},
          {"concentration", cert.concentration},
          {"violations", v}};
}

json to_json(const DualPotentials& p) { return {{"sense", std::string(to_string(p.sense))}, {"u", p.u}}; }

DiscreteMeasure load_measure(const std::filesystem::path& path) {
  return with_path(path, [](const json& j) { return measure_from_json(j); });
}

SampledVectorField load_field(const std::filesystem::path& path) {
  return with_path(path, [&](const json& j) { return field_from_json(j, path.parent_path()); });
}

CouplingPlan load_plan(const std::filesystem::path& path) {
  return with_path(path, [](const json& j) { return plan_from_json(j); });
}

GridFunction load_grid(const std::filesystem::path& path) {
  return with_path(path, [](const json& j) { return grid_from_json(j); });
}

CostTensor load_cost(const std::filesystem::path& path) {
  return with_path(path, [](const json& j) { return cost_from_json(j); });
}

std::string plan_csv(const CouplingPlan& plan) {
  std::ostringstream out;
  for (std::size_t k = 0; k < plan.arity(); ++k) out << 'i' << k << ',';
  out << "mass\n";
  IndexTuple idx(plan.arity());
  char buf[32];
  plan.for_each([&](std::uint64_t f, double mass) {
    plan.shape().unflat(f, idx);
    for (Index i : idx) out << i << ',';
    std::snprintf(buf, sizeof buf, "%.17g", mass);
    out << buf << '\n';
  });
  return out.str();
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) bad(path.string() + ": cannot write");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) bad(path.string() + ": write failed");
}

}  // namespace mmot::io
