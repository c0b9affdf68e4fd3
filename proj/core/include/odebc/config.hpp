#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "odebc/metrics.hpp"
#include "odebc/model.hpp"
#include "odebc/sampler.hpp"

namespace odebc::config {

using Json = nlohmann::ordered_json;

/// Every recognised key with its default value. Sections: world, data,
/// solver, search, metric, ablation, independence, benchmark, run.
Json defaults();

/// Overlays `file` on the defaults, then applies "dotted.key=value"
/// overrides. Values parse as JSON, falling back to a plain string.
/// Unknown keys and type mismatches throw ValidationError naming the key.
/// A world section holding "components" replaces the preset wholesale.
Json resolve(const Json& file, const std::vector<std::string>& overrides);

/// Throws IoError if unreadable, ValidationError if not a JSON object.
Json load_file(const std::filesystem::path& path);

/// Preset form {"preset", "texture_seed"} or explicit form
/// {"hr_shape", "block", "tau", "components": [{"weight", "std", "mean"}]}.
/// A mean is a literal list or {"texture": constant | gradient | checker |
/// smooth-noise | detail, "amplitude", "value", "seed", "index", "offset"}.
GmmWorld world_from_json(const Json& world);
/// Always the explicit form.
Json world_to_json(const GmmWorld& world);

/// {"kind", "steps", "segments", "seed", "fine_steps"}; a non-empty
/// segment list takes precedence over "steps".
SolverConfig solver_from_json(const Json& solver, const DiscreteSchedule& s);
DistanceMetric metric_from_json(const Json& metric);

}  // namespace odebc::config
