#include "ppsync/scenario_io.hpp"

#include <fstream>
#include <sstream>

#include "ppsync/error.hpp"

namespace ppsync {

using json = nlohmann::ordered_json;

namespace {

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

[[noreturn]] void bad(const std::string& key, const std::string& what) {
  throw Error(ErrorCode::ConfigError, key + ": " + what);
}

// Read helpers carry the dotted key so messages name the field.
struct Reader {
  const json& node;
  std::string path;

  std::string key(std::string_view k) const { return path.empty() ? std::string(k) : path + "." + std::string(k); }

  bool has(std::string_view k) const { return node.is_object() && node.contains(k); }

  Reader at(std::string_view k) const {
    if (!has(k)) bad(key(k), "missing");
    return {node.at(std::string(k)), key(k)};
  }

  double number(std::string_view k) const {
    const Reader r = at(k);
    if (!r.node.is_number()) bad(r.path, "expected a number");
    return r.node.get<double>();
  }

  double number_or(std::string_view k, double fallback) const { return has(k) ? number(k) : fallback; }

  std::string string(std::string_view k) const {
    const Reader r = at(k);
    if (!r.node.is_string()) bad(r.path, "expected a string");
    return r.node.get<std::string>();
  }

  std::vector<double> numbers(std::string_view k) const {
    const Reader r = at(k);
    if (!r.node.is_array()) bad(r.path, "expected an array");
    std::vector<double> out;
    for (const auto& v : r.node) {
      if (!v.is_number()) bad(r.path, "expected an array of numbers");
      out.push_back(v.get<double>());
    }
    return out;
  }

  Eigen::VectorXd vector(std::string_view k) const {
    const auto v = numbers(k);
    return Eigen::Map<const Eigen::VectorXd>(v.data(), Eigen::Index(v.size()));
  }

  Eigen::MatrixXd matrix(std::string_view k) const {
    const Reader r = at(k);
    if (!r.node.is_array() || r.node.empty()) bad(r.path, "expected a non-empty array of rows");
    const std::size_t cols = r.node[0].is_array() ? r.node[0].size() : 0;
    Eigen::MatrixXd m(r.node.size(), cols);
    for (std::size_t i = 0; i < r.node.size(); ++i) {
      const auto& row = r.node[i];
      if (!row.is_array() || row.size() != cols) bad(r.path, "rows must be arrays of equal length");
      for (std::size_t j = 0; j < cols; ++j) {
        if (!row[j].is_number()) bad(r.path, "expected numbers");
        m(i, j) = row[j].get<double>();
      }
    }
    return m;
  }
};

json performance_to_json(const PerformanceFunction& pf) {
  return json{{"rho0", pf.rho0}, {"rho_inf", pf.rho_inf}, {"ell", pf.ell}};
}

PerformanceFunction performance_from(const Reader& r) {
  return {r.number("rho0"), r.number("rho_inf"), r.number("ell")};
}

std::string_view exec_name(ExecPolicy p) {
  switch (p) {
    case ExecPolicy::Serial: return "serial";
    case ExecPolicy::Parallel: return "parallel";
    case ExecPolicy::Auto: break;
  }
  return "auto";
}

ExecPolicy parse_exec(const std::string& name, const std::string& key) {
  if (name == "auto") return ExecPolicy::Auto;
  if (name == "serial") return ExecPolicy::Serial;
  if (name == "parallel") return ExecPolicy::Parallel;
  bad(key, "unknown execution policy '" + name + "'");
}

json plant_to_json(const PlantConfig& plant) {
  return std::visit(
      [](const auto& p) -> json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Example1Plant>) {
          return json{{"type", "example1"}, {"amplitudes", p.amplitudes}};
        } else if constexpr (std::is_same_v<T, Example2Plant>) {
          return json{{"type", "example2"},
                      {"a_matrix", matrix_to_json(p.a_matrix)},
                      {"a", matrix_to_json(p.a)},
                      {"b", matrix_to_json(p.b)},
                      {"c", matrix_to_json(p.c)}};
        } else {
          json agents = json::array();
          for (std::size_t i = 0; i < p.a_m.size(); ++i)
            agents.push_back(json{{"a_m", matrix_to_json(p.a_m[i])},
                                  {"b_m", matrix_to_json(p.b_m[i])},
                                  {"bias", vector_to_json(p.bias[i])},
                                  {"cos_amplitude", vector_to_json(p.cos_amplitude[i])}});
          return json{{"type", "linear"}, {"agents", std::move(agents)}};
        }
      },
      plant);
}

PlantConfig plant_from(const Reader& r) {
  const std::string type = r.string("type");
  if (type == "example1") return Example1Plant{r.numbers("amplitudes")};
  if (type == "example2") {
    Example2Plant p;
    const Eigen::MatrixXd a = r.matrix("a_matrix");
    if (a.rows() != 3 || a.cols() != 3) bad(r.key("a_matrix"), "must be 3x3");
    p.a_matrix = a;
    p.a = r.matrix("a");
    p.b = r.matrix("b");
    p.c = r.matrix("c");
    return p;
  }
  if (type == "linear") {
    const Reader agents = r.at("agents");
    if (!agents.node.is_array()) bad(agents.path, "expected an array");
    LinearPlant p;
    for (std::size_t i = 0; i < agents.node.size(); ++i) {
      const Reader a{agents.node[i], agents.path + "." + std::to_string(i)};
      p.a_m.push_back(a.matrix("a_m"));
      p.b_m.push_back(a.matrix("b_m"));
      p.bias.push_back(a.vector("bias"));
      p.cos_amplitude.push_back(a.vector("cos_amplitude"));
    }
    return p;
  }
  bad(r.key("type"), "unknown plant type '" + type + "'");
}

json leader_to_json(const LeaderConfig& leader) {
  if (const auto* c = std::get_if<ConstantLeader>(&leader))
    return json{{"type", "constant"}, {"value", vector_to_json(c->value)}};
  const auto& c = std::get<CosineLeader>(leader);
  return json{{"type", "cosine"},
              {"amplitude", vector_to_json(c.amplitude)},
              {"frequency", vector_to_json(c.frequency)}};
}

LeaderConfig leader_from(const Reader& r) {
  const std::string type = r.string("type");
  if (type == "constant") return ConstantLeader{r.vector("value")};
  if (type == "cosine") return CosineLeader{r.vector("amplitude"), r.vector("frequency")};
  bad(r.key("type"), "unknown leader type '" + type + "'");
}

bool all_equal_performance(const std::vector<PerformanceFunction>& v) {
  for (const auto& pf : v)
    if (pf.rho0 != v.front().rho0 || pf.rho_inf != v.front().rho_inf || pf.ell != v.front().ell)
      return false;
  return true;
}

std::vector<std::string> split_key(std::string_view key) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    parts.emplace_back(key.substr(start, dot - start));
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  return parts;
}

json* find(json& doc, std::string_view key) {
  json* node = &doc;
  for (const auto& part : split_key(key)) {
    if (part.empty()) return nullptr;
    if (node->is_object()) {
      auto it = node->find(part);
      if (it == node->end()) return nullptr;
      node = &*it;
    } else if (node->is_array()) {
      std::size_t idx = 0;
      std::istringstream in(part);
      if (!(in >> idx) || !in.eof() || idx >= node->size()) return nullptr;
      node = &(*node)[idx];
    } else {
      return nullptr;
    }
  }
  return node;
}

bool same_kind(const json& a, const json& b) {
  if (a.is_number() && b.is_number()) return true;
  return a.type() == b.type();
}

}  // namespace

json scenario_to_json(const ScenarioConfig& cfg) {
  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["name"] = cfg.name;
  doc["seed"] = cfg.seed;
  doc["graph"] = json{{"adjacency", matrix_to_json(cfg.adjacency)},
                      {"pinning", vector_to_json(cfg.pinning)}};
  doc["plant"] = plant_to_json(cfg.plant);
  doc["leader"] = leader_to_json(cfg.leader);
  if (!cfg.performance.empty() && all_equal_performance(cfg.performance)) {
    doc["performance"] = performance_to_json(cfg.performance.front());
  } else {
    json per = json::array();
    for (const auto& pf : cfg.performance) per.push_back(performance_to_json(pf));
    doc["performance"] = std::move(per);
  }
  doc["transform"] = json{{"variant", to_string(cfg.transform.variant)},
                          {"delta_hi", cfg.transform.delta_hi},
                          {"delta_lo", cfg.transform.delta_lo},
                          {"xi", cfg.transform.xi},
                          {"normalize_erf_gain", cfg.transform.normalize_erf_gain}};
  doc["gains"] = json{{"c", cfg.gains.c}, {"k", cfg.gains.k}, {"gamma", cfg.gains.gamma}};
  doc["bounds"] = json{{"x_M", cfg.bounds.x_M},         {"theta_M", cfg.bounds.theta_M},
                       {"sigma_M", cfg.bounds.sigma_M}, {"d_theta", cfg.bounds.d_theta},
                       {"d_sigma", cfg.bounds.d_sigma}, {"F_M", cfg.bounds.F_M}};
  doc["initial"] = json{{"x", vector_to_json(cfg.x_init)},
                        {"theta_hat", cfg.theta_hat_init},
                        {"sigma_hat", cfg.sigma_hat_init}};
  doc["sim"] = json{{"dt", cfg.sim.dt},
                    {"horizon", cfg.sim.horizon},
                    {"log_stride", cfg.sim.log_stride},
                    {"blowup", cfg.sim.blowup},
                    {"exec", exec_name(cfg.sim.exec)}};
  return doc;
}

ScenarioConfig scenario_from_json(const json& doc) {
  const Reader root{doc, ""};
  if (!doc.is_object()) bad("(root)", "expected an object");
  const double version = root.number("schema_version");
  if (version != kSchemaVersion)
    bad("schema_version", "unsupported version " + root.at("schema_version").node.dump());

  ScenarioConfig cfg;
  cfg.name = root.has("name") ? root.string("name") : "scenario";
  if (root.has("seed")) {
    const Reader s = root.at("seed");
    if (!s.node.is_number_integer() || s.node.get<long long>() < 0) bad("seed", "expected a non-negative integer");
    cfg.seed = s.node.get<std::uint64_t>();
  }

  const Reader graph = root.at("graph");
  cfg.adjacency = graph.matrix("adjacency");
  cfg.pinning = graph.vector("pinning");
  cfg.plant = plant_from(root.at("plant"));
  cfg.leader = leader_from(root.at("leader"));

  const Reader perf = root.at("performance");
  const int agents = int(cfg.adjacency.rows());
  int dim = 1;
  if (const auto* c = std::get_if<ConstantLeader>(&cfg.leader)) dim = int(c->value.size());
  if (const auto* c = std::get_if<CosineLeader>(&cfg.leader)) dim = int(c->amplitude.size());
  if (perf.node.is_object()) {
    cfg.performance.assign(std::size_t(agents) * dim, performance_from(perf));
  } else if (perf.node.is_array()) {
    for (std::size_t i = 0; i < perf.node.size(); ++i)
      cfg.performance.push_back(performance_from({perf.node[i], perf.path + "." + std::to_string(i)}));
  } else {
    bad("performance", "expected an object or an array of objects");
  }

  const Reader tr = root.at("transform");
  try {
    cfg.transform.variant = parse_variant(tr.string("variant"));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError) throw;
    bad("transform.variant", e.what());
  }
  cfg.transform.delta_hi = tr.number("delta_hi");
  cfg.transform.delta_lo = tr.number("delta_lo");
  cfg.transform.xi = tr.number_or("xi", cfg.transform.xi);
  if (tr.has("normalize_erf_gain")) {
    const Reader n = tr.at("normalize_erf_gain");
    if (!n.node.is_boolean()) bad(n.path, "expected true or false");
    cfg.transform.normalize_erf_gain = n.node.get<bool>();
  }

  const Reader gains = root.at("gains");
  cfg.gains.c = gains.number("c");
  cfg.gains.k = gains.number("k");
  const Reader gamma = gains.at("gamma");
  if (gamma.node.is_number())
    cfg.gains.gamma.assign(agents, gamma.node.get<double>());
  else
    cfg.gains.gamma = gains.numbers("gamma");

  if (root.has("bounds")) {
    const Reader b = root.at("bounds");
    cfg.bounds.x_M = b.number_or("x_M", cfg.bounds.x_M);
    cfg.bounds.theta_M = b.number_or("theta_M", cfg.bounds.theta_M);
    cfg.bounds.sigma_M = b.number_or("sigma_M", cfg.bounds.sigma_M);
    cfg.bounds.d_theta = b.number_or("d_theta", cfg.bounds.d_theta);
    cfg.bounds.d_sigma = b.number_or("d_sigma", cfg.bounds.d_sigma);
    cfg.bounds.F_M = b.number_or("F_M", cfg.bounds.F_M);
  }

  const Reader init = root.at("initial");
  cfg.x_init = init.vector("x");
  if (init.has("theta_hat")) cfg.theta_hat_init = init.numbers("theta_hat");
  if (init.has("sigma_hat")) cfg.sigma_hat_init = init.numbers("sigma_hat");

  const Reader sim = root.at("sim");
  cfg.sim.dt = sim.number("dt");
  cfg.sim.horizon = sim.number("horizon");
  if (sim.has("log_stride")) {
    const Reader s = sim.at("log_stride");
    if (!s.node.is_number_integer()) bad(s.path, "expected an integer");
    cfg.sim.log_stride = s.node.get<int>();
  }
  cfg.sim.blowup = sim.number_or("blowup", cfg.sim.blowup);
  if (sim.has("exec")) cfg.sim.exec = parse_exec(sim.string("exec"), "sim.exec");
  return cfg;
}

bool is_builtin(std::string_view name) { return name == "example1" || name == "example2"; }

std::vector<std::string> builtin_names() { return {"example1", "example2"}; }

ScenarioConfig load_scenario(const std::string& ref) {
  if (ref == "example1") return example1_config();
  if (ref == "example2") return example2_config();
  std::ifstream in(ref);
  if (!in) bad("scenario", "'" + ref + "' is neither a builtin scenario nor a readable file");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    bad("scenario", "'" + ref + "' is not valid JSON: " + e.what());
  }
  return scenario_from_json(doc);
}

void save_scenario(const ScenarioConfig& cfg, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << scenario_to_json(cfg).dump(2) << '\n';
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

Override parse_override(std::string_view text) {
  const auto eq = text.find('=');
  if (eq == std::string_view::npos || eq == 0)
    throw Error(ErrorCode::ConfigError, "override '" + std::string(text) + "' must look like key=value");
  return {std::string(text.substr(0, eq)), std::string(text.substr(eq + 1))};
}

ScenarioConfig apply_overrides(const ScenarioConfig& cfg, const std::vector<Override>& overrides) {
  if (overrides.empty()) return cfg;
  json doc = scenario_to_json(cfg);
  bool reseed = false;
  for (const auto& [key, text] : overrides) {
    json* slot = find(doc, key);
    if (slot == nullptr || key == "schema_version") bad(key, "no such key in the scenario");
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;
    if (!same_kind(*slot, value))
      bad(key, "expected " + std::string(slot->type_name()) + ", got '" + text + "'");
    *slot = std::move(value);
    if (key == "seed") reseed = true;
  }
  if (reseed && doc["plant"]["type"] == "example1") doc["plant"]["amplitudes"] = json::array();
  ScenarioConfig out = scenario_from_json(doc);
  if (reseed) {
    if (auto* p = std::get_if<Example1Plant>(&out.plant))
      p->amplitudes = example1_amplitudes(out.seed, out.agents());
  }
  return out;
}

std::string lookup(const ScenarioConfig& cfg, std::string_view key) {
  json doc = scenario_to_json(cfg);
  const json* slot = find(doc, key);
  if (slot == nullptr) bad(std::string(key), "no such key in the scenario");
  return slot->dump();
}

}  // namespace ppsync
