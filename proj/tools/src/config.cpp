#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "driftscope/cli.hpp"
#include "driftscope/error.hpp"

namespace driftscope::cli {

namespace {

using nlohmann::ordered_json;

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

void only_keys(const ordered_json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError("key '" + path + "': expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : j.items())
    if (!ok.count(k)) throw ConfigError("unknown key '" + join(path, k) + "'");
}

const ordered_json& required(const ordered_json& j, const std::string& path, const char* key) {
  if (!j.contains(key)) throw ConfigError("missing required key '" + join(path, key) + "'");
  return j.at(key);
}

double as_number(const ordered_json& v, const std::string& key) {
  if (!v.is_number()) throw ConfigError("key '" + key + "': expected a number");
  return v.get<double>();
}

std::size_t as_count(const ordered_json& v, const std::string& key) {
  if (!v.is_number_integer() || v.get<long long>() < 0)
    throw ConfigError("key '" + key + "': expected a nonnegative integer");
  return v.get<std::size_t>();
}

std::string as_string(const ordered_json& v, const std::string& key) {
  if (!v.is_string()) throw ConfigError("key '" + key + "': expected a string");
  return v.get<std::string>();
}

Vec2 as_point(const ordered_json& v, const std::string& key) {
  if (!v.is_array() || v.size() != 2) throw ConfigError("key '" + key + "': expected [x, y]");
  return {as_number(v[0], key), as_number(v[1], key)};
}

ordered_json point_json(Vec2 p) { return ordered_json::array({p.x, p.y}); }

Shape parse_domain(const ordered_json& j, ordered_json& echo) {
  const std::string kind = as_string(required(j, "domain", "kind"), "domain.kind");
  if (kind == "disc") {
    only_keys(j, "domain", {"kind", "center", "radius"});
    const Vec2 c = j.contains("center") ? as_point(j["center"], "domain.center") : Vec2{};
    const double r = j.contains("radius") ? as_number(j["radius"], "domain.radius") : 1.0;
    if (!(r > 0.0)) throw ConfigError("key 'domain.radius': must be positive");
    echo = {{"kind", "disc"}, {"center", point_json(c)}, {"radius", r}};
    return Disc{c, r};
  }
  if (kind == "rectangle") {
    only_keys(j, "domain", {"kind", "lower", "upper"});
    const Vec2 lo = as_point(required(j, "domain", "lower"), "domain.lower");
    const Vec2 hi = as_point(required(j, "domain", "upper"), "domain.upper");
    if (!(lo.x < hi.x && lo.y < hi.y)) throw ConfigError("key 'domain.upper': must exceed domain.lower");
    echo = {{"kind", "rectangle"}, {"lower", point_json(lo)}, {"upper", point_json(hi)}};
    return Rectangle{lo, hi};
  }
  throw ConfigError("key 'domain.kind': expected disc or rectangle, got '" + kind + "'");
}

double parse_theta(const ordered_json& j, const std::string& path) {
  const double theta = as_number(required(j, path, "theta"), join(path, "theta"));
  if (!(theta > 0.0)) throw ConfigError("key '" + join(path, "theta") + "': must be positive");
  return theta;
}

Kernel1D parse_kernel_1d(const ordered_json& j, const std::string& path, ordered_json& echo) {
  if (!j.is_object()) throw ConfigError("key '" + path + "': expected an object");
  const std::string kind = as_string(required(j, path, "kind"), join(path, "kind"));
  if (kind == "brownian") {
    only_keys(j, path, {"kind"});
    echo = {{"kind", "brownian"}};
    return Brownian1D{};
  }
  if (kind == "ou") {
    only_keys(j, path, {"kind", "theta"});
    const double theta = parse_theta(j, path);
    echo = {{"kind", "ou"}, {"theta", theta}};
    return Ou1D{theta};
  }
  throw ConfigError("key '" + join(path, "kind") + "': expected brownian or ou, got '" + kind + "'");
}

KernelSpec parse_kernel(const ordered_json& j, const std::string& path, ordered_json& echo) {
  if (!j.is_object()) throw ConfigError("key '" + path + "': expected an object");
  const std::string kind = as_string(required(j, path, "kind"), join(path, "kind"));
  if (kind == "brownian") {
    only_keys(j, path, {"kind"});
    echo = {{"kind", "brownian"}};
    return KernelSpec(BrownianKernel{});
  }
  if (kind == "ou") {
    only_keys(j, path, {"kind", "theta"});
    const double theta = parse_theta(j, path);
    echo = {{"kind", "ou"}, {"theta", theta}};
    return KernelSpec(OuKernel{theta});
  }
  if (kind == "product") {
    only_keys(j, path, {"kind", "first", "second"});
    ordered_json e1, e2;
    Kernel1D k1 = parse_kernel_1d(required(j, path, "first"), join(path, "first"), e1);
    Kernel1D k2 = parse_kernel_1d(required(j, path, "second"), join(path, "second"), e2);
    echo = {{"kind", "product"}, {"first", e1}, {"second", e2}};
    return KernelSpec(ProductKernel{std::move(k1), std::move(k2)});
  }
  throw ConfigError("key '" + join(path, "kind") + "': expected brownian, ou or product, got '" + kind + "'");
}

TruthSpec parse_truth(const ordered_json& j, ordered_json& echo) {
  const std::string kind = as_string(required(j, "truth", "kind"), "truth.kind");
  TruthSpec t;
  if (kind == "linear") {
    only_keys(j, "truth", {"kind", "matrix", "offset"});
    const ordered_json& m = required(j, "truth", "matrix");
    if (!m.is_array() || m.size() != 2 || !m[0].is_array() || m[0].size() != 2 || !m[1].is_array() ||
        m[1].size() != 2)
      throw ConfigError("key 'truth.matrix': expected [[a, b], [c, d]]");
    t.matrix = {as_number(m[0][0], "truth.matrix"), as_number(m[0][1], "truth.matrix"),
                as_number(m[1][0], "truth.matrix"), as_number(m[1][1], "truth.matrix")};
    if (j.contains("offset")) t.offset = as_point(j["offset"], "truth.offset");
    echo = {{"kind", "linear"},
            {"matrix", {{t.matrix[0], t.matrix[1]}, {t.matrix[2], t.matrix[3]}}},
            {"offset", point_json(t.offset)}};
    return t;
  }
  if (kind == "gaussian-bump") {
    only_keys(j, "truth", {"kind", "alpha", "sigma", "center"});
    t.kind = TruthSpec::Kind::gaussian_bump;
    t.alpha = as_number(required(j, "truth", "alpha"), "truth.alpha");
    t.sigma = as_number(required(j, "truth", "sigma"), "truth.sigma");
    if (!(t.sigma > 0.0)) throw ConfigError("key 'truth.sigma': must be positive");
    if (j.contains("center")) t.center = as_point(j["center"], "truth.center");
    echo = {{"kind", "gaussian-bump"}, {"alpha", t.alpha}, {"sigma", t.sigma}, {"center", point_json(t.center)}};
    return t;
  }
  throw ConfigError("key 'truth.kind': expected linear or gaussian-bump, got '" + kind + "'");
}

}  // namespace

PipelineConfig parse_config_text(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  only_keys(j, "", {"domain", "n_angles", "n_offsets", "ladder", "grid_n", "observed", "reference", "filter",
                    "solver_tol", "max_iter", "density_floor", "boundary_nodes", "reference_node", "seed",
                    "output_dir", "metric_scale", "truth"});

  PipelineConfig cfg;
  ordered_json echo;
  ordered_json domain_echo = {{"kind", "disc"}, {"center", point_json({0, 0})}, {"radius", 1.0}};
  if (j.contains("domain")) cfg.domain = parse_domain(j["domain"], domain_echo);
  echo["domain"] = domain_echo;

  if (j.contains("n_angles")) cfg.geometry.n_angles = as_count(j["n_angles"], "n_angles");
  if (j.contains("n_offsets")) cfg.geometry.n_offsets = as_count(j["n_offsets"], "n_offsets");
  echo["n_angles"] = cfg.geometry.n_angles;
  echo["n_offsets"] = cfg.geometry.n_offsets;

  if (j.contains("ladder")) {
    if (!j["ladder"].is_array()) throw ConfigError("key 'ladder': expected an array of times");
    for (const auto& t : j["ladder"]) cfg.ladder.push_back(as_number(t, "ladder"));
  }
  echo["ladder"] = cfg.effective_ladder();

  if (j.contains("grid_n")) cfg.grid_n = as_count(j["grid_n"], "grid_n");
  echo["grid_n"] = cfg.grid_n;

  ordered_json obs_echo = {{"kind", "ou"}, {"theta", 1.0}}, ref_echo = {{"kind", "brownian"}};
  if (j.contains("observed")) cfg.observed = parse_kernel(j["observed"], "observed", obs_echo);
  if (j.contains("reference")) cfg.reference = parse_kernel(j["reference"], "reference", ref_echo);
  echo["observed"] = obs_echo;
  echo["reference"] = ref_echo;

  if (j.contains("filter")) {
    try {
      cfg.filter = parse_filter(as_string(j["filter"], "filter"));
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("key 'filter': ") + e.what());
    }
  }
  echo["filter"] = to_string(cfg.filter);

  if (j.contains("solver_tol")) cfg.solver_tol = as_number(j["solver_tol"], "solver_tol");
  if (j.contains("max_iter")) cfg.max_iter = as_count(j["max_iter"], "max_iter");
  if (j.contains("density_floor")) cfg.density_floor = as_number(j["density_floor"], "density_floor");
  if (j.contains("boundary_nodes")) cfg.boundary_nodes = as_count(j["boundary_nodes"], "boundary_nodes");
  if (j.contains("reference_node")) cfg.reference_node = as_count(j["reference_node"], "reference_node");
  if (j.contains("seed")) cfg.seed = as_count(j["seed"], "seed");
  if (j.contains("output_dir")) cfg.output_dir = as_string(j["output_dir"], "output_dir");
  if (j.contains("metric_scale")) cfg.metric_scale = as_number(j["metric_scale"], "metric_scale");
  echo["solver_tol"] = cfg.solver_tol;
  echo["max_iter"] = cfg.max_iter;
  echo["density_floor"] = cfg.density_floor;
  echo["boundary_nodes"] = cfg.effective_boundary_nodes();
  echo["reference_node"] = cfg.reference_node;
  echo["seed"] = cfg.seed;
  echo["output_dir"] = cfg.output_dir.string();
  echo["metric_scale"] = cfg.metric_scale;

  if (j.contains("truth") && !j["truth"].is_null()) {
    ordered_json t;
    cfg.truth = parse_truth(j["truth"], t);
    echo["truth"] = t;
  } else {
    echo["truth"] = nullptr;
  }

  cfg.validate();
  cfg.echo = echo.dump();
  return cfg;
}

PipelineConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return parse_config_text(s.str());
}

}  // namespace driftscope::cli
