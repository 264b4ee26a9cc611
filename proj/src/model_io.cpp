#include "efe/model_io.hpp"

#include <fstream>
#include <sstream>

#include "efe/error.hpp"

namespace efe {

using nlohmann::json;

namespace {

template <typename T>
T get_field(const json& j, const char* key) {
  require(j.contains(key), ErrorKind::DimensionMismatch, std::string("model file is missing \"") + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(ErrorKind::DimensionMismatch, std::string("field \"") + key + "\": " + e.what());
  }
}

}  // namespace

RawModel raw_model_from_json(const json& j) {
  require(j.is_object(), ErrorKind::DimensionMismatch, "model file must be a JSON object");
  RawModel raw;
  raw.type = j.value("type", std::string("mdp"));
  require(raw.type == "mdp" || raw.type == "pomdp", ErrorKind::DimensionMismatch, "type must be \"mdp\" or \"pomdp\"");
  raw.n_states = get_field<std::size_t>(j, "n_states");
  raw.n_actions = get_field<std::size_t>(j, "n_actions");
  raw.horizon = get_field<std::size_t>(j, "horizon");
  raw.transition = get_field<std::vector<std::vector<std::vector<double>>>>(j, "transition");
  raw.initial = get_field<std::vector<double>>(j, "initial");
  // Non-finite rewards arrive as strings ("inf") or null in JSON; surface them
  // as NonFiniteReward rather than a parse error.
  require(j.contains("reward") && j["reward"].is_array(), ErrorKind::DimensionMismatch, "reward must be an array");
  for (const auto& r : j["reward"]) {
    if (r.is_number()) {
      raw.reward.push_back(r.get<double>());
    } else {
      fail(ErrorKind::NonFiniteReward, "reward entries must be finite numbers");
    }
  }
  if (j.contains("n_obs") && !j["n_obs"].is_null()) raw.n_obs = get_field<std::size_t>(j, "n_obs");
  if (j.contains("likelihood") && !j["likelihood"].is_null())
    raw.likelihood = get_field<std::vector<std::vector<double>>>(j, "likelihood");
  if (j.contains("action_mask") && !j["action_mask"].is_null()) {
    std::vector<std::vector<bool>> mask;
    for (const auto& row : j["action_mask"]) {
      std::vector<bool> r;
      for (const auto& v : row) r.push_back(v.is_boolean() ? v.get<bool>() : v.get<double>() != 0.0);
      mask.push_back(std::move(r));
    }
    raw.action_mask = std::move(mask);
  }
  if (j.contains("labels") && j["labels"].is_object()) raw.labels = j["labels"].get<Labels>();
  return raw;
}

json to_json(const RawModel& raw) {
  json j;
  j["type"] = raw.type;
  j["n_states"] = raw.n_states;
  j["n_actions"] = raw.n_actions;
  j["horizon"] = raw.horizon;
  j["transition"] = raw.transition;
  j["initial"] = raw.initial;
  j["reward"] = raw.reward;
  if (raw.n_obs) j["n_obs"] = *raw.n_obs;
  if (raw.likelihood) j["likelihood"] = *raw.likelihood;
  if (raw.action_mask) j["action_mask"] = *raw.action_mask;
  if (!raw.labels.empty()) j["labels"] = raw.labels;
  return j;
}

AnyModel validate_any(const RawModel& raw) {
  if (raw.type == "pomdp") return validate_pomdp(raw);
  return validate_mdp(raw);
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::Io, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::DimensionMismatch, path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorKind::Io, "cannot write " + path);
  out << text;
  require(out.good(), ErrorKind::Io, "write failed for " + path);
}

AnyModel load_model(const std::string& path) { return validate_any(raw_model_from_json(read_json_file(path))); }

FiniteMdp load_mdp(const std::string& path) {
  auto model = load_model(path);
  if (auto* pomdp = std::get_if<FinitePomdp>(&model)) return pomdp->mdp();
  return std::get<FiniteMdp>(model);
}

FinitePomdp load_pomdp(const std::string& path) {
  auto model = load_model(path);
  require(std::holds_alternative<FinitePomdp>(model), ErrorKind::DimensionMismatch, path + " is not a POMDP");
  return std::get<FinitePomdp>(model);
}

void save_model(const std::string& path, const RawModel& raw) { write_text_file(path, dump(to_json(raw))); }

json to_json(const Episode& ep) {
  json j;
  j["states"] = ep.states;
  j["actions"] = ep.actions;
  if (ep.observations) j["observations"] = *ep.observations;
  j["rewards"] = ep.rewards;
  j["return"] = ep.total_return();
  return j;
}

Episode episode_from_json(const json& j) {
  Episode ep;
  ep.states = j.at("states").get<std::vector<std::size_t>>();
  ep.actions = j.at("actions").get<std::vector<std::size_t>>();
  if (j.contains("observations")) ep.observations = j["observations"].get<std::vector<std::size_t>>();
  ep.rewards = j.at("rewards").get<std::vector<double>>();
  return ep;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace efe
