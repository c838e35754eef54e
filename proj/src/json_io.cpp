#include "json_io.hpp"

#include <cmath>
#include <json.hpp>

#include "common.hpp"
#include "constants.hpp"

namespace rb {

namespace {

using nlohmann::json;

json parse_object(const std::string& text, const char* what) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(Status::parse_error, std::string(what) + ": " + e.what());
  }
  require(j.is_object(), Status::parse_error,
          std::string(what) + ": expected a JSON object");
  return j;
}

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed,
                         const char* where) {
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* key : allowed) {
      if (item.key() == key) {
        known = true;
        break;
      }
    }
    require(known, Status::parse_error,
            std::string(where) + ": unknown key '" + item.key() + "'");
  }
}

double get_number(const json& j, const char* key, const char* where) {
  const auto it = j.find(key);
  require(it != j.end(), Status::parse_error,
          std::string(where) + ": missing key '" + key + "'");
  require(it->is_number(), Status::parse_error,
          std::string(where) + ": key '" + key + "' must be a number");
  return it->get<double>();
}

EmitterSpec emitter_from_json_object(const json& j) {
  reject_unknown_keys(j, {"name", "tau0_ns", "dw0", "xi", "zpl_thz"}, "emitter");
  const auto name_it = j.find("name");
  require(name_it != j.end() && name_it->is_string(), Status::parse_error,
          "emitter: missing string key 'name'");
  EmitterSpec spec;
  spec.name = name_it->get<std::string>();
  spec.tau0 = get_number(j, "tau0_ns", "emitter") * 1e-9;
  spec.dw0 = get_number(j, "dw0", "emitter");
  spec.xi = get_number(j, "xi", "emitter");
  spec.zpl_frequency = get_number(j, "zpl_thz", "emitter") * 1e12;
  spec.validate();
  return spec;
}

RepeaterScenario scenario_from_json_object(const json& j) {
  reject_unknown_keys(j,
                      {"l_km", "l_att_km", "tau_ph_ns", "tau_cz_ns", "eps_r",
                       "eta_det", "l_min_km", "n_ph_max"},
                      "scenario");
  RepeaterScenario scn;  // defaults
  bool tau_cz_given = false;
  for (const auto& item : j.items()) {
    const std::string& key = item.key();
    if (key == "n_ph_max") {
      require(item.value().is_number_integer(), Status::parse_error,
              "scenario: n_ph_max must be an integer");
      scn.n_ph_max = item.value().get<std::int32_t>();
      continue;
    }
    require(item.value().is_number(), Status::parse_error,
            "scenario: key '" + key + "' must be a number");
    const double v = item.value().get<double>();
    if (key == "l_km") scn.l_km = v;
    else if (key == "l_att_km") scn.l_att_km = v;
    else if (key == "tau_ph_ns") scn.tau_ph_s = v * 1e-9;
    else if (key == "tau_cz_ns") { scn.tau_cz_s = v * 1e-9; tau_cz_given = true; }
    else if (key == "eps_r") scn.eps_r = v;
    else if (key == "eta_det") scn.eta_det = v;
    else if (key == "l_min_km") scn.l_min_km = v;
  }
  // Keep the tau_cz = 10 tau_ph default coupled to a custom tau_ph.
  if (!tau_cz_given && j.contains("tau_ph_ns")) scn.tau_cz_s = 10.0 * scn.tau_ph_s;
  scn.validate();
  return scn;
}

json scenario_to_json_object(const RepeaterScenario& scn) {
  json j;
  j["l_km"] = scn.l_km;
  j["l_att_km"] = scn.l_att_km;
  j["tau_ph_ns"] = scn.tau_ph_s * 1e9;
  j["tau_cz_ns"] = scn.tau_cz_s * 1e9;
  j["eps_r"] = scn.eps_r;
  j["eta_det"] = scn.eta_det;
  j["l_min_km"] = scn.l_min_km;
  j["n_ph_max"] = scn.n_ph_max;
  return j;
}

json emitter_to_json_object(const EmitterSpec& spec) {
  json j;
  j["name"] = spec.name;
  j["tau0_ns"] = spec.tau0 * 1e9;
  j["dw0"] = spec.dw0;
  j["xi"] = spec.xi;
  j["zpl_thz"] = spec.zpl_frequency * 1e-12;
  return j;
}

}  // namespace

EmitterSpec emitter_from_json(const std::string& text) {
  return emitter_from_json_object(parse_object(text, "emitter"));
}

std::string emitter_to_json(const EmitterSpec& spec) {
  return emitter_to_json_object(spec).dump(2);
}

RepeaterScenario scenario_from_json(const std::string& text) {
  return scenario_from_json_object(parse_object(text, "scenario"));
}

std::string scenario_to_json(const RepeaterScenario& scn) {
  return scenario_to_json_object(scn).dump(2);
}

double ScenarioFile::effective_f_p() const {
  return orientation_scaled_purcell(f_p, alpha_rad);
}

double ScenarioFile::eta_emitter() const {
  return chain_efficiency(emitter, effective_f_p(), beta_wg, beta_f);
}

ScenarioFile scenario_file_from_json(const std::string& text) {
  const json j = parse_object(text, "scenario file");
  reject_unknown_keys(j, {"emitter", "chain", "repeater", "sweep"}, "scenario file");

  ScenarioFile file;
  const auto emitter_it = j.find("emitter");
  require(emitter_it != j.end(), Status::parse_error,
          "scenario file: missing 'emitter'");
  if (emitter_it->is_string()) {
    file.emitter = emitter_preset(emitter_it->get<std::string>());
  } else {
    require(emitter_it->is_object(), Status::parse_error,
            "scenario file: 'emitter' must be a preset name or an object");
    file.emitter = emitter_from_json_object(*emitter_it);
  }

  const auto chain_it = j.find("chain");
  require(chain_it != j.end() && chain_it->is_object(), Status::parse_error,
          "scenario file: missing object 'chain'");
  reject_unknown_keys(*chain_it, {"f_p", "beta_wg", "beta_f", "alpha_deg"}, "chain");
  file.f_p = get_number(*chain_it, "f_p", "chain");
  file.beta_wg = get_number(*chain_it, "beta_wg", "chain");
  file.beta_f = get_number(*chain_it, "beta_f", "chain");
  if (chain_it->contains("alpha_deg")) {
    file.alpha_rad =
        get_number(*chain_it, "alpha_deg", "chain") * constants::pi / 180.0;
  }
  require(file.f_p >= 0.0, Status::invalid_argument, "chain: f_p must be >= 0");
  require(file.beta_wg >= 0.0 && file.beta_wg <= 1.0, Status::invalid_argument,
          "chain: beta_wg must be in [0, 1]");
  require(file.beta_f >= 0.0 && file.beta_f <= 1.0, Status::invalid_argument,
          "chain: beta_f must be in [0, 1]");

  if (const auto it = j.find("repeater"); it != j.end()) {
    require(it->is_object(), Status::parse_error,
            "scenario file: 'repeater' must be an object");
    file.repeater = scenario_from_json_object(*it);
  }

  if (const auto it = j.find("sweep"); it != j.end()) {
    require(it->is_object(), Status::parse_error,
            "scenario file: 'sweep' must be an object");
    reject_unknown_keys(*it, {"eta_from", "eta_to", "steps"}, "sweep");
    SweepGrid grid;
    grid.eta_from = get_number(*it, "eta_from", "sweep");
    grid.eta_to = get_number(*it, "eta_to", "sweep");
    const auto steps_it = it->find("steps");
    require(steps_it != it->end() && steps_it->is_number_integer(),
            Status::parse_error, "sweep: 'steps' must be an integer");
    grid.steps = steps_it->get<std::int32_t>();
    require(grid.steps >= 1, Status::invalid_argument, "sweep: steps must be >= 1");
    require(grid.eta_from > 0.0 && grid.eta_from <= 1.0 && grid.eta_to > 0.0 &&
                grid.eta_to <= 1.0,
            Status::invalid_argument, "sweep: grid values must be in (0, 1]");
    file.sweep = grid;
  }
  return file;
}

std::string scenario_file_to_json(const ScenarioFile& file) {
  json j;
  j["emitter"] = emitter_to_json_object(file.emitter);
  json chain;
  chain["f_p"] = file.f_p;
  chain["beta_wg"] = file.beta_wg;
  chain["beta_f"] = file.beta_f;
  chain["alpha_deg"] = file.alpha_rad * 180.0 / constants::pi;
  j["chain"] = chain;
  j["repeater"] = scenario_to_json_object(file.repeater);
  if (file.sweep) {
    json sweep;
    sweep["eta_from"] = file.sweep->eta_from;
    sweep["eta_to"] = file.sweep->eta_to;
    sweep["steps"] = file.sweep->steps;
    j["sweep"] = sweep;
  }
  return j.dump(2);
}

}  // namespace rb
