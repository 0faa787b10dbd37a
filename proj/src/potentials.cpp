#include "mmot/potentials.hpp"

#include <string>

#include "mmot/error.hpp"

namespace mmot {

std::string_view to_string(Sense sense) { return sense == Sense::Min ? "min" : "max"; }

Sense parse_sense(std::string_view text) {
  if (text == "min") return Sense::Min;
  if (text == "max") return Sense::Max;
  throw Error(ErrorCode::InvalidArgument, "sense must be \"min\" or \"max\", got \"" + std::string(text) + "\"");
}

double DualPotentials::value_at(std::span<const Index> idx) const {
  double sum = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) sum += u[k][idx[k]];
  return sum;
}

double DualPotentials::objective(const std::vector<std::vector<double>>& weights) const {
  if (weights.size() != u.size()) throw Error(ErrorCode::DimensionMismatch, "weights do not match potential count");
  double sum = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    if (weights[k].size() != u[k].size()) throw Error(ErrorCode::DimensionMismatch, "weights do not match potentials");
    for (std::size_t i = 0; i < u[k].size(); ++i) sum += weights[k][i] * u[k][i];
  }
  return sum;
}

double DualPotentials::objective(std::span<const DiscreteMeasure> marginals) const {
  std::vector<std::vector<double>> w;
  for (const auto& m : marginals) w.emplace_back(m.weights().data(), m.weights().data() + m.weights().size());
  return objective(w);
}

void normalize_potentials(DualPotentials& p, std::span<const double> w0) {
  if (p.u.size() < 2) return;
  double mean = 0.0;
  for (std::size_t i = 0; i < w0.size(); ++i) mean += w0[i] * p.u[0][i];
  for (double& v : p.u[0]) v -= mean;
  for (double& v : p.u[1]) v += mean;
}

}  // namespace mmot
