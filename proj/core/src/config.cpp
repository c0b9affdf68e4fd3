#include "odebc/config.hpp"

#include "odebc/errors.hpp"
#include "odebc/presets.hpp"
#include "odebc/tensor_io.hpp"

namespace odebc::config {

namespace {

Json solver_entry(const char* kind, int steps, std::vector<int> segments = {}) {
  return Json{{"kind", kind}, {"steps", steps}, {"segments", std::move(segments)},
              {"seed", 0}, {"fine_steps", 10000}};
}

bool same_kind(const Json& a, const Json& b) {
  if (a.is_number() && b.is_number()) return true;
  return a.type() == b.type();
}

void overlay(Json& base, const Json& over, const std::string& path) {
  for (auto it = over.begin(); it != over.end(); ++it) {
    const std::string key = path.empty() ? it.key() : path + "." + it.key();
    if (!base.contains(it.key())) throw ValidationError("unknown config key '" + key + "'");
    Json& slot = base[it.key()];
    if (!same_kind(slot, it.value()))
      throw ValidationError("config key '" + key + "' expects a " + slot.type_name() +
                            ", got " + it.value().type_name());
    if (slot.is_object())
      overlay(slot, it.value(), key);
    else
      slot = it.value();
  }
}

void apply_world(Json& resolved, const Json& world) {
  if (!world.is_object()) throw ValidationError("config key 'world' must be an object");
  if (world.contains("components")) {
    resolved["world"] = world;
    return;
  }
  overlay(resolved["world"], world, "world");
}

template <typename T>
T get(const Json& j, const char* key, const std::string& section) {
  if (!j.contains(key)) throw ValidationError("config key '" + section + "." + key + "' is missing");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ValidationError("config key '" + section + "." + key + "' has the wrong type");
  }
}

double num(const Json& j, const char* key, double fallback, const std::string& path) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw ValidationError("config key '" + path + "." + key + "' must be a number");
  return j.at(key).get<double>();
}

/// A literal list of values or a named texture generator.
Tensor mean_from_json(const Json& m, const Shape& hr, std::uint32_t block, const std::string& path) {
  if (m.is_array()) {
    const auto values = get<std::vector<double>>(Json{{"v", m}}, "v", path);
    require(values.size() == hr.numel(), "config key '" + path + "' has " +
                                             std::to_string(values.size()) + " values, expected " +
                                             std::to_string(hr.numel()));
    return Tensor(hr, values);
  }
  if (!m.is_object() || !m.contains("texture"))
    throw ValidationError("config key '" + path + "' must be a list or {\"texture\": ...}");
  const auto tex = get<std::string>(m, "texture", path);
  const double amp = num(m, "amplitude", 1.0, path);
  const auto seed = m.contains("seed") ? get<std::uint64_t>(m, "seed", path) : std::uint64_t{0};
  const auto index = m.contains("index") ? get<std::uint64_t>(m, "index", path) : std::uint64_t{0};
  Tensor t;
  if (tex == "constant") t = constant_image(hr, num(m, "value", 0.0, path));
  else if (tex == "gradient") t = gradient_image(hr, amp);
  else if (tex == "checker") t = checker_image(hr, amp);
  else if (tex == "smooth-noise") t = smooth_noise_image(hr, amp, seed, index);
  else if (tex == "detail") t = detail_pattern(hr, block, amp, seed, index);
  else
    throw ValidationError("config key '" + path + ".texture': unknown texture '" + tex +
                          "' (expected constant, gradient, checker, smooth-noise, detail)");
  const double offset = num(m, "offset", 0.0, path);
  for (double& v : t.values()) v += offset;
  return t;
}

}  // namespace

Json defaults() {
  Json d;
  d["world"] = {{"preset", "sr8"}, {"texture_seed", 7}};
  d["data"] = {{"dir", ""}, {"seed", 11}, {"count", 128}};
  d["solver"] = solver_entry("ddim", 50);
  d["search"] = {{"K", 256}, {"R", 64}, {"holdout", 64}, {"n_random", 64}, {"seed", 1}};
  d["metric"] = {{"name", "l2"}, {"peak", 1.0}};
  d["ablation"] = {{"r_sizes", {1, 2, 4, 8, 16}},
                   {"k_sizes", {10, 20, 40, 80, 160}},
                   {"repeats", 8},
                   {"k_fixed", 200},
                   {"r_fixed", 20},
                   {"seed", 3}};
  d["independence"] = {{"conditions", 10}, {"candidates", 100}, {"seed", 5}};
  d["benchmark"] = {{"solvers", Json::array({solver_entry("ddpm", 0, {90, 60, 60, 20, 20}),
                                             solver_entry("ddim", 50), solver_entry("ddim", 100),
                                             solver_entry("dpm2", 20)})},
                    {"metrics", {"l2", "gradperc", "psnr"}},
                    {"seed", 9}};
  d["run"] = {{"workers", 0}, {"out", "out"}};
  return d;
}

Json resolve(const Json& file, const std::vector<std::string>& overrides) {
  Json resolved = defaults();
  if (!file.is_null()) {
    if (!file.is_object()) throw ValidationError("config must be a JSON object");
    for (auto it = file.begin(); it != file.end(); ++it) {
      const std::string& key = it.key();
      if (key == "world") {
        apply_world(resolved, it.value());
      } else if (key == "metric" && it.value().is_string()) {
        resolved["metric"]["name"] = it.value();
      } else {
        overlay(resolved, Json{{key, it.value()}}, "");
      }
    }
  }
  for (const auto& ov : overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos || eq == 0)
      throw ValidationError("override '" + ov + "' is not of the form key=value");
    const std::string key = ov.substr(0, eq);
    const std::string text = ov.substr(eq + 1);
    Json value = Json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;
    // Build the nested object for the dotted path and overlay it.
    Json patch = value;
    std::vector<std::string> parts;
    for (std::size_t start = 0;;) {
      const auto dot = key.find('.', start);
      parts.push_back(key.substr(start, dot - start));
      if (dot == std::string::npos) break;
      start = dot + 1;
    }
    for (auto it = parts.rbegin(); it != parts.rend(); ++it) patch = Json{{*it, patch}};
    if (parts.front() == "world" && resolved["world"].contains("components")) {
      Json& slot = resolved["world"];
      if (parts.size() != 2 || !slot.contains(parts[1]))
        throw ValidationError("unknown config key '" + key + "'");
      slot[parts[1]] = value;
    } else {
      overlay(resolved, patch, "");
    }
  }
  return resolved;
}

Json load_file(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  Json j = Json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ValidationError(path.string() + ": malformed JSON");
  if (!j.is_object()) throw ValidationError(path.string() + ": config must be a JSON object");
  return j;
}

GmmWorld world_from_json(const Json& w) {
  if (!w.contains("components"))
    return make_preset_world(get<std::string>(w, "preset", "world"),
                             get<std::uint64_t>(w, "texture_seed", "world"));
  const auto dims = get<std::vector<std::uint32_t>>(w, "hr_shape", "world");
  require(dims.size() == 3, "config key 'world.hr_shape' must be [height, width, channels]");
  const Shape hr(dims);
  const auto& arr = w.at("components");
  require(arr.is_array(), "config key 'world.components' must be an array");
  std::vector<GmmComponent> comps;
  for (std::size_t j = 0; j < arr.size(); ++j) {
    const std::string sec = "world.components[" + std::to_string(j) + "]";
    if (!arr[j].contains("mean")) throw ValidationError("config key '" + sec + ".mean' is missing");
    comps.push_back({get<double>(arr[j], "weight", sec), get<double>(arr[j], "std", sec),
                     mean_from_json(arr[j].at("mean"), hr, w.value("block", 1u), sec + ".mean")});
  }
  return GmmWorld(hr, get<std::uint32_t>(w, "block", "world"), get<double>(w, "tau", "world"),
                  std::move(comps));
}

Json world_to_json(const GmmWorld& world) {
  Json comps = Json::array();
  for (const auto& c : world.components())
    comps.push_back({{"weight", c.weight}, {"std", c.stddev}, {"mean", c.mean.vec()}});
  return Json{{"hr_shape", world.hr_shape().dims},
              {"block", world.block()},
              {"tau", world.tau()},
              {"components", std::move(comps)}};
}

SolverConfig solver_from_json(const Json& j, const DiscreteSchedule& s) {
  const auto kind = parse_solver_kind(get<std::string>(j, "kind", "solver"));
  if (kind == SolverKind::kEulerRef) {
    const auto cfg = SolverConfig::euler(get<int>(j, "fine_steps", "solver"));
    validate(cfg, s);
    return cfg;
  }
  const auto segments = j.contains("segments") ? get<std::vector<int>>(j, "segments", "solver")
                                               : std::vector<int>{};
  SolverConfig cfg;
  cfg.kind = kind;
  cfg.plan = segments.empty() ? SolverConfig::ddim(s, get<int>(j, "steps", "solver")).plan
                              : resample_timesteps(s, segments);
  if (j.contains("seed")) cfg.noise_seed = get<std::uint64_t>(j, "seed", "solver");
  validate(cfg, s);
  return cfg;
}

DistanceMetric metric_from_json(const Json& j) {
  if (j.is_string()) return metric_by_name(j.get<std::string>());
  return metric_by_name(get<std::string>(j, "name", "metric"),
                        j.contains("peak") ? get<double>(j, "peak", "metric") : 1.0);
}

}  // namespace odebc::config
