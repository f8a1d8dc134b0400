#ifndef LUSIM_SCENARIO_HPP
#define LUSIM_SCENARIO_HPP

#include <fstream>
#include <optional>
#include <set>
#include <string>

#include <json.hpp>

#include "lusim/model.hpp"
#include "lusim/protocol.hpp"

namespace lusim {

/// Abnormal-detach scenario knobs. `time` silently disconnects the device at
/// that instant; `incoming_rate` drives network-side delivery attempts, whose
/// failure against a silent device is one of the two detach-detection paths.
struct DetachScenario {
  std::optional<double> time;
  double incoming_rate = 0.0;
};

/// Full input of one simulation run (everything except seed and horizon).
struct ScenarioConfig {
  RateConfig rates{0.5, 0.5, 0.5};
  TimerParams timer{1.0};
  Policy policy{};
  CostModel costs = CostModel::defaults();
  std::optional<bool> ios_refreshes;  // unset -> policy default
  DetachScenario detach{};

  bool effective_ios_refreshes() const {
    return ios_refreshes.value_or(default_ios_refreshes(policy.kind));
  }

  ProtocolParams protocol_params() const {
    ProtocolParams p;
    p.policy = policy.kind;
    p.ios_refreshes = effective_ios_refreshes();
    p.publish_interval = policy.kind == PolicyKind::CloudAware ? policy.publish_interval : 0.0;
    p.cost_ios = costs.cost(UpdateEvent::Ios);
    p.cost_ccrr = costs.cost(UpdateEvent::Ccrr);
    p.cost_prr = costs.cost(UpdateEvent::Prr);
    p.cost_csa = costs.cost(UpdateEvent::Csa);
    return p;
  }

  void validate() const {
    // RateConfig/TimerParams/Policy/CostModel validate on construction.
    if (detach.time) {
      detail::require(std::isfinite(*detach.time) && *detach.time > 0,
                      "detach.time must be finite and > 0");
    }
    detail::require(std::isfinite(detach.incoming_rate) && detach.incoming_rate >= 0,
                    "detach.incoming_rate must be finite and >= 0");
  }
};

namespace config_detail {

using nlohmann::json;

inline void check_keys(const json& j, const std::set<std::string>& known,
                       const std::string& where) {
  for (const auto& item : j.items()) {
    if (!known.count(item.key()))
      throw std::invalid_argument("unknown config key '" + item.key() + "' in " + where);
  }
}

inline double num(const json& j, const std::string& key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number())
    throw std::invalid_argument("config key '" + key + "' must be a number");
  return j.at(key).get<double>();
}

}  // namespace config_detail

/// Builds a scenario from the JSON config schema; any omitted key keeps its
/// default. Schema:
///   rates.{ios,ccrr,csa}
///   timer.t_p
///   policy.{kind,publish_interval,ios_refreshes}
///   costs.catalog.{NAME: bytes}  costs.procedures.{prr,ccrr,ios}  costs.csa_local
///   detach.{time,incoming_rate}
inline ScenarioConfig scenario_from_json(const nlohmann::json& j) {
  using config_detail::check_keys;
  using config_detail::num;
  try {
    if (!j.is_object()) throw std::invalid_argument("config root must be a JSON object");
    check_keys(j, {"rates", "timer", "policy", "costs", "detach"}, "config root");
    ScenarioConfig cfg;

    if (j.contains("rates")) {
      const auto& r = j.at("rates");
      check_keys(r, {"ios", "ccrr", "csa"}, "rates");
      cfg.rates = RateConfig(num(r, "ios", cfg.rates.lambda_ios),
                             num(r, "ccrr", cfg.rates.lambda_ccrr),
                             num(r, "csa", cfg.rates.lambda_csa));
    }
    if (j.contains("timer")) {
      const auto& t = j.at("timer");
      check_keys(t, {"t_p"}, "timer");
      cfg.timer = TimerParams(num(t, "t_p", cfg.timer.t_p));
    }
    if (j.contains("policy")) {
      const auto& p = j.at("policy");
      check_keys(p, {"kind", "publish_interval", "ios_refreshes"}, "policy");
      PolicyKind kind = cfg.policy.kind;
      if (p.contains("kind")) kind = parse_policy_kind(p.at("kind").get<std::string>());
      cfg.policy = Policy(kind, num(p, "publish_interval", cfg.policy.publish_interval));
      if (p.contains("ios_refreshes")) cfg.ios_refreshes = p.at("ios_refreshes").get<bool>();
    }
    if (j.contains("costs")) {
      const auto& c = j.at("costs");
      check_keys(c, {"catalog", "procedures", "csa_local"}, "costs");
      MessageCatalog catalog = cfg.costs.catalog;
      auto procedures = cfg.costs.procedure_messages;
      if (c.contains("catalog")) {
        std::map<std::string, int> entries;
        for (const auto& item : c.at("catalog").items())
          entries[item.key()] = item.value().get<int>();
        catalog = MessageCatalog(std::move(entries));
      }
      if (c.contains("procedures")) {
        const auto& procs = c.at("procedures");
        check_keys(procs, {"prr", "ccrr", "ios"}, "costs.procedures");
        auto read_list = [&](const char* key, UpdateEvent e) {
          if (procs.contains(key))
            procedures[e] = procs.at(key).get<std::vector<std::string>>();
        };
        read_list("prr", UpdateEvent::Prr);
        read_list("ccrr", UpdateEvent::Ccrr);
        read_list("ios", UpdateEvent::Ios);
      }
      cfg.costs = CostModel(std::move(catalog), std::move(procedures),
                            num(c, "csa_local", cfg.costs.csa_local_cost));
    }
    if (j.contains("detach")) {
      const auto& d = j.at("detach");
      check_keys(d, {"time", "incoming_rate"}, "detach");
      if (d.contains("time")) cfg.detach.time = d.at("time").get<double>();
      cfg.detach.incoming_rate = num(d, "incoming_rate", 0.0);
    }

    cfg.validate();
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("invalid config: ") + e.what());
  }
}

inline nlohmann::json scenario_to_json(const ScenarioConfig& cfg) {
  nlohmann::json j;
  j["rates"] = {{"ios", cfg.rates.lambda_ios},
                {"ccrr", cfg.rates.lambda_ccrr},
                {"csa", cfg.rates.lambda_csa}};
  j["timer"] = {{"t_p", cfg.timer.t_p}};
  j["policy"] = {{"kind", to_string(cfg.policy.kind)},
                 {"publish_interval", cfg.policy.publish_interval}};
  if (cfg.ios_refreshes) j["policy"]["ios_refreshes"] = *cfg.ios_refreshes;
  nlohmann::json catalog = nlohmann::json::object();
  for (const auto& [name, size] : cfg.costs.catalog.entries) catalog[name] = size;
  j["costs"] = {{"catalog", catalog},
                {"procedures",
                 {{"prr", cfg.costs.procedure_messages.at(UpdateEvent::Prr)},
                  {"ccrr", cfg.costs.procedure_messages.at(UpdateEvent::Ccrr)},
                  {"ios", cfg.costs.procedure_messages.at(UpdateEvent::Ios)}}},
                {"csa_local", cfg.costs.csa_local_cost}};
  if (cfg.detach.time || cfg.detach.incoming_rate > 0) {
    nlohmann::json d = nlohmann::json::object();
    if (cfg.detach.time) d["time"] = *cfg.detach.time;
    d["incoming_rate"] = cfg.detach.incoming_rate;
    j["detach"] = d;
  }
  return j;
}

inline ScenarioConfig load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("cannot parse config file " + path + ": " + e.what());
  }
  return scenario_from_json(j);
}

}  // namespace lusim

#endif  // LUSIM_SCENARIO_HPP
