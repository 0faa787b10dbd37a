#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "mmot/costs.hpp"
#include "mmot/duality.hpp"
#include "mmot/measures.hpp"
#include "mmot/monotone.hpp"

namespace mmot::io {

using json = nlohmann::json;

// Parse a JSON file; failures become InputError naming the path.
json read_json(const std::filesystem::path& path);

// {"points": [[...], ...], "weights": [...]}
DiscreteMeasure measure_from_json(const json& j);
json to_json(const DiscreteMeasure& mu);

// {"measure": <path or inline measure>, "values": [[...], ...]}; relative
// paths resolve against `dir`.
SampledVectorField field_from_json(const json& j, const std::filesystem::path& dir);
json to_json(const SampledVectorField& u);

// {"arity": m, "shape": [...], "entries": [[i_0, ..., i_{m-1}, mass], ...]}.
// "shape" is optional on input; the smallest enclosing box is used without it.
CouplingPlan plan_from_json(const json& j);
json to_json(const CouplingPlan& plan);

// {"axes": [[...], ...], "values": [...]} (row-major, last axis fastest)
GridFunction grid_from_json(const json& j);
json to_json(const GridFunction& g);

// {"shape": [...], "values": [...]} (row-major)
CostTensor cost_from_json(const json& j);
json to_json(const CostTensor& c);

json to_json(const Certificate& cert);
json to_json(const DualPotentials& p);

// Load helpers. Any parse or validation failure is rethrown as InputError
// with the path in the message.
DiscreteMeasure load_measure(const std::filesystem::path& path);
SampledVectorField load_field(const std::filesystem::path& path);
CouplingPlan load_plan(const std::filesystem::path& path);
GridFunction load_grid(const std::filesystem::path& path);
CostTensor load_cost(const std::filesystem::path& path);

// One row per nonzero entry: index tuple then mass, comma separated.
std::string plan_csv(const CouplingPlan& plan);

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

// Writes atomically enough for our purposes: whole buffer, then close.
void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace mmot::io
