#include <screwsim/config.hpp>

#include <screwsim/errors.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace screwsim {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, const char* where,
                    std::initializer_list<const char*> allowed) {
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* key : allowed) {
      if (item.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw SchemaError(std::string("config: unknown key '") + item.key() + "' in " + where);
    }
  }
}

Vec3 vec3_from(const json& j, const char* where) {
  if (!j.is_array() || j.size() != 3) {
    throw SchemaError(std::string("config: ") + where + " must be an array of 3 numbers");
  }
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

BoxSpec box_from(const json& j, const char* where) {
  if (!j.is_object()) {
    throw SchemaError(std::string("config: ") + where + " must be an object");
  }
  reject_unknown(j, where, {"lo", "hi"});
  BoxSpec box;
  if (j.contains("lo")) box.lo = vec3_from(j.at("lo"), where);
  if (j.contains("hi")) box.hi = vec3_from(j.at("hi"), where);
  for (int i = 0; i < 3; ++i) {
    if (box.lo[i] > box.hi[i]) {
      throw SchemaError(std::string("config: ") + where + " has lo > hi");
    }
  }
  return box;
}

VirtualSpec virtual_from(const json& j, const char* where) {
  if (!j.is_object()) {
    throw SchemaError(std::string("config: ") + where + " must be an object");
  }
  reject_unknown(j, where, {"omega0", "pitch", "axis_point", "phase"});
  VirtualSpec spec;
  if (!j.contains("omega0")) {
    throw SchemaError(std::string("config: ") + where + " requires omega0");
  }
  spec.omega0 = vec3_from(j.at("omega0"), where);
  if (j.contains("pitch")) spec.pitch = j.at("pitch").get<double>();
  if (j.contains("axis_point")) spec.axis_point = vec3_from(j.at("axis_point"), where);
  if (j.contains("phase")) spec.phase = j.at("phase").get<double>();
  return spec;
}

SimConfig config_from_json(const json& j, const std::string& base_dir) {
  if (!j.is_object()) throw SchemaError("config: top level must be an object");
  reject_unknown(j, "config",
                 {"law", "n_agents", "h", "horizon", "seed", "omega0", "alpha",
                  "virtual", "groups", "schedule", "init", "stride",
                  "window_fraction", "classifier"});
  for (const char* field : {"law", "n_agents"}) {
    if (!j.contains(field)) {
      throw SchemaError(std::string("config: missing field '") + field + "'");
    }
  }

  SimConfig cfg;
  cfg.law = law_from_name(j.at("law").get<std::string>());
  cfg.n_agents = j.at("n_agents").get<int>();
  if (j.contains("h")) cfg.h = j.at("h").get<double>();
  if (j.contains("horizon")) cfg.horizon = j.at("horizon").get<double>();
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("omega0")) cfg.omega0 = vec3_from(j.at("omega0"), "omega0");
  if (j.contains("alpha")) cfg.alpha = j.at("alpha").get<double>();
  if (j.contains("virtual")) {
    cfg.virtual_particle = virtual_from(j.at("virtual"), "virtual");
  }
  if (j.contains("groups")) {
    if (!j.at("groups").is_array()) throw SchemaError("config: groups must be an array");
    for (const auto& jg : j.at("groups")) {
      if (!jg.is_object()) throw SchemaError("config: each group must be an object");
      reject_unknown(jg, "group", {"agents", "virtual"});
      GroupSpec gs;
      if (!jg.contains("agents") || !jg.at("agents").is_array()) {
        throw SchemaError("config: group requires an agents array");
      }
      for (const auto& ja : jg.at("agents")) gs.agents.push_back(ja.get<int>());
      if (!jg.contains("virtual")) {
        throw SchemaError("config: group requires a virtual particle");
      }
      gs.virtual_particle = virtual_from(jg.at("virtual"), "group virtual");
      cfg.groups.push_back(std::move(gs));
    }
  }
  if (j.contains("schedule")) {
    std::filesystem::path p = j.at("schedule").get<std::string>();
    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
    cfg.schedule = load_schedule(p.string());
    cfg.schedule_path = j.at("schedule").get<std::string>();
  }
  if (j.contains("init")) {
    const json& ji = j.at("init");
    if (!ji.is_object()) throw SchemaError("config: init must be an object");
    reject_unknown(ji, "init", {"position", "omega", "b", "c"});
    if (ji.contains("position")) cfg.init.position = box_from(ji.at("position"), "init.position");
    if (ji.contains("omega")) cfg.init.omega = box_from(ji.at("omega"), "init.omega");
    if (ji.contains("b")) cfg.init.b = box_from(ji.at("b"), "init.b");
    if (ji.contains("c")) cfg.init.c = box_from(ji.at("c"), "init.c");
  }
  if (j.contains("stride")) cfg.stride = j.at("stride").get<int>();
  if (j.contains("window_fraction")) {
    cfg.window_fraction = j.at("window_fraction").get<double>();
  }
  if (j.contains("classifier")) {
    const json& jc = j.at("classifier");
    if (!jc.is_object()) throw SchemaError("config: classifier must be an object");
    reject_unknown(jc, "classifier", {"tol_eq", "tol_omega", "tol_pitch"});
    if (jc.contains("tol_eq")) cfg.classifier.tol_eq = jc.at("tol_eq").get<double>();
    if (jc.contains("tol_omega")) cfg.classifier.tol_omega = jc.at("tol_omega").get<double>();
    if (jc.contains("tol_pitch")) cfg.classifier.tol_pitch = jc.at("tol_pitch").get<double>();
  }
  return cfg;
}

}  // namespace

SimConfig parse_config(const std::string& json_text, const std::string& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("config: invalid JSON: ") + e.what());
  }
  try {
    return config_from_json(j, base_dir);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("config: ") + e.what());
  }
}

SimConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("config: cannot open " + path);
  std::ostringstream text;
  text << in.rdbuf();
  const std::string base = std::filesystem::path(path).parent_path().string();
  return parse_config(text.str(), base.empty() ? "." : base);
}

}  // namespace screwsim
