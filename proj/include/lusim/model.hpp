#ifndef LUSIM_MODEL_HPP
#define LUSIM_MODEL_HPP

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lusim {

// Event classes on the device's update path. PRR is the timer-driven periodic
// re-registration; the other three are exogenous arrivals.
enum class UpdateEvent { Prr, Ccrr, Ios, Csa };

enum class PolicyKind { StandardIms, CloudAware };

inline const char* to_string(UpdateEvent e) {
  switch (e) {
    case UpdateEvent::Prr: return "PRR";
    case UpdateEvent::Ccrr: return "CCRR";
    case UpdateEvent::Ios: return "IOS";
    case UpdateEvent::Csa: return "CSA";
  }
  return "?";
}

inline const char* to_string(PolicyKind k) {
  return k == PolicyKind::StandardIms ? "StandardIMS" : "CloudAware";
}

inline PolicyKind parse_policy_kind(std::string_view s) {
  if (s == "StandardIMS") return PolicyKind::StandardIms;
  if (s == "CloudAware") return PolicyKind::CloudAware;
  throw std::invalid_argument("unknown policy kind '" + std::string(s) +
                              "' (expected StandardIMS or CloudAware)");
}

namespace detail {
inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}
}  // namespace detail

/// Poisson arrival rates of the update-event processes, in events per model
/// time unit. All rates must be finite and non-negative.
struct RateConfig {
  double lambda_ios;
  double lambda_ccrr;
  double lambda_csa;

  RateConfig(double ios, double ccrr, double csa)
      : lambda_ios(ios), lambda_ccrr(ccrr), lambda_csa(csa) {
    detail::require(std::isfinite(ios) && ios >= 0, "lambda_ios must be finite and >= 0");
    detail::require(std::isfinite(ccrr) && ccrr >= 0, "lambda_ccrr must be finite and >= 0");
    detail::require(std::isfinite(csa) && csa >= 0, "lambda_csa must be finite and >= 0");
  }

  /// Combined arrival rate of all update events.
  double total() const { return lambda_ios + lambda_ccrr + lambda_csa; }
};

inline double total_event_rate(const RateConfig& rates) { return rates.total(); }

/// Registration timer length, shared by device and registrar.
struct TimerParams {
  double t_p;

  explicit TimerParams(double tp) : t_p(tp) {
    detail::require(std::isfinite(tp) && tp > 0, "t_p must be finite and > 0");
  }
};

/// SIP message sizes in bytes. Names and byte counts are the entire message
/// model; nothing is serialized.
struct MessageCatalog {
  std::map<std::string, int> entries;

  MessageCatalog() = default;
  explicit MessageCatalog(std::map<std::string, int> e) : entries(std::move(e)) {
    for (const auto& [name, size] : entries)
      detail::require(size > 0, "message size for '" + name + "' must be a positive integer");
  }

  static MessageCatalog defaults() {
    return MessageCatalog({{"REGISTER", 225}, {"INVITE", 810}, {"200OK", 100}, {"ACK", 60}});
  }

  int size_of(const std::string& name) const {
    auto it = entries.find(name);
    detail::require(it != entries.end(), "message '" + name + "' not in catalog");
    return it->second;
  }
};

// One power unit per byte exchanged; all powers are reported in these units.
inline constexpr double kPowerUnitsPerByte = 1.0;

/// Maps each update event to its device power cost: signaled procedures are
/// priced by the byte sum of their message exchange, a cloud-service access by
/// the flat local timer-update cost.
struct CostModel {
  MessageCatalog catalog;
  std::map<UpdateEvent, std::vector<std::string>> procedure_messages;
  double csa_local_cost = 10.0;

  CostModel(MessageCatalog cat, std::map<UpdateEvent, std::vector<std::string>> procs,
            double csa_cost)
      : catalog(std::move(cat)), procedure_messages(std::move(procs)), csa_local_cost(csa_cost) {
    detail::require(std::isfinite(csa_cost) && csa_cost >= 0,
                    "csa_local_cost must be finite and >= 0");
    for (UpdateEvent e : {UpdateEvent::Prr, UpdateEvent::Ccrr, UpdateEvent::Ios}) {
      auto it = procedure_messages.find(e);
      detail::require(it != procedure_messages.end() && !it->second.empty(),
                      std::string("procedure ") + to_string(e) + " needs a non-empty message list");
      for (const auto& name : it->second) catalog.size_of(name);  // must resolve
    }
  }

  static CostModel defaults() {
    return CostModel(MessageCatalog::defaults(),
                     {{UpdateEvent::Prr, {"REGISTER", "200OK"}},
                      {UpdateEvent::Ccrr, {"REGISTER", "200OK"}},
                      {UpdateEvent::Ios, {"INVITE", "200OK", "ACK"}}},
                     10.0);
  }

  double cost(UpdateEvent e) const {
    if (e == UpdateEvent::Csa) return csa_local_cost;
    auto it = procedure_messages.find(e);
    detail::require(it != procedure_messages.end(), "unknown event kind");
    double bytes = 0;
    for (const auto& name : it->second) bytes += catalog.size_of(name);
    return bytes * kPowerUnitsPerByte;
  }
};

inline double event_cost(const CostModel& model, UpdateEvent event) { return model.cost(event); }

/// Location-update policy. publish_interval batches the monitor's publishes
/// to the registrar at fixed boundaries (0 = publish at every access); it is
/// meaningful only under CloudAware. StandardIMS ignores CSA events entirely.
struct Policy {
  PolicyKind kind = PolicyKind::StandardIms;
  double publish_interval = 0.0;

  Policy() = default;
  explicit Policy(PolicyKind k, double pub = 0.0) : kind(k), publish_interval(pub) {
    detail::require(std::isfinite(pub) && pub >= 0, "publish_interval must be finite and >= 0");
  }
};

// Session events refresh the registration timers under CloudAware by default;
// the StandardIMS baseline defers its periodic schedule on re-registrations
// only. Overridable per scenario.
inline bool default_ios_refreshes(PolicyKind kind) { return kind == PolicyKind::CloudAware; }

}  // namespace lusim

#endif  // LUSIM_MODEL_HPP
