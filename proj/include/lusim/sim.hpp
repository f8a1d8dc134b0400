#ifndef LUSIM_SIM_HPP
#define LUSIM_SIM_HPP

#include <charconv>
#include <cstdint>
#include <cstring>
#include <functional>
#include <optional>
#include <ostream>
#include <queue>
#include <string>
#include <vector>

#include "lusim/protocol.hpp"
#include "lusim/rng.hpp"
#include "lusim/scenario.hpp"

namespace lusim {

enum class EventKind : std::uint8_t {
  IosArrival,
  CcrrArrival,
  CsaArrival,
  TimerExpiry,
  PublishTick,
  IncomingSession,
  Detach,
};

enum class Entity : std::uint8_t { Device, Registrar, Monitor, SessionSource };

inline const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::IosArrival: return "ios_arrival";
    case EventKind::CcrrArrival: return "ccrr_arrival";
    case EventKind::CsaArrival: return "csa_arrival";
    case EventKind::TimerExpiry: return "timer_expiry";
    case EventKind::PublishTick: return "publish_tick";
    case EventKind::IncomingSession: return "incoming_session";
    case EventKind::Detach: return "detach";
  }
  return "?";
}

inline const char* to_string(Entity e) {
  switch (e) {
    case Entity::Device: return "device";
    case Entity::Registrar: return "registrar";
    case Entity::Monitor: return "monitor";
    case Entity::SessionSource: return "session_source";
  }
  return "?";
}

struct SimEvent {
  double time;
  std::uint64_t sequence;
  EventKind kind;
  Entity entity;
};

/// Min-queue over (time, sequence): equal-time events execute in insertion
/// order, and sequence numbers are unique per run.
class EventQueue {
 public:
  void push(double time, EventKind kind, Entity entity) {
    heap_.push(SimEvent{time, next_sequence_++, kind, entity});
  }

  SimEvent pop() {
    SimEvent ev = heap_.top();
    heap_.pop();
    return ev;
  }

  bool empty() const { return heap_.empty(); }
  std::size_t size() const { return heap_.size(); }

 private:
  struct Later {
    bool operator()(const SimEvent& a, const SimEvent& b) const {
      if (a.time != b.time) return a.time > b.time;
      return a.sequence > b.sequence;
    }
  };
  std::priority_queue<SimEvent, std::vector<SimEvent>, Later> heap_;
  std::uint64_t next_sequence_ = 0;
};

/// One executed event, with post-transition timer views and the power charged
/// to the device.
struct TraceRecord {
  double time;
  EventKind kind;
  Entity entity;
  double device_expiry;
  double registrar_expiry;
  double power_charged;
};

using TraceSink = std::function<void(const TraceRecord&)>;

/// FNV-1a over the executed (time, kind, entity) tuple sequence; stable replay
/// fingerprint for determinism checks.
class TraceDigest {
 public:
  void update(double time, EventKind kind, Entity entity) {
    std::uint64_t bits;
    std::memcpy(&bits, &time, sizeof(bits));
    for (int i = 0; i < 8; ++i) absorb(static_cast<std::uint8_t>(bits >> (8 * i)));
    absorb(static_cast<std::uint8_t>(kind));
    absorb(static_cast<std::uint8_t>(entity));
  }

  std::uint64_t value() const { return hash_; }

 private:
  void absorb(std::uint8_t byte) {
    hash_ ^= byte;
    hash_ *= 0x100000001B3ull;
  }
  std::uint64_t hash_ = 0xCBF29CE484222325ull;
};

/// Outcome of one run. Counts cover executed events only; in-flight intervals
/// at the horizon are discarded. checkpoint_count is the number of non-PRR
/// events that refreshed the device timer (the checkpoint process the
/// periodic-re-registration distribution is conditioned on).
struct SimReport {
  std::uint64_t ios_count = 0;
  std::uint64_t ccrr_count = 0;
  std::uint64_t csa_count = 0;
  std::uint64_t prr_count = 0;
  std::uint64_t incoming_count = 0;
  std::uint64_t publish_count = 0;
  std::uint64_t checkpoint_count = 0;
  std::uint64_t executed_events = 0;
  double total_power = 0.0;
  double horizon = 0.0;
  std::optional<double> detach_time;
  std::optional<double> detach_detected_at;
  std::optional<double> registrar_expiry_at_detach;
  std::uint64_t trace_digest = 0;

  std::uint64_t arrival_count() const { return ios_count + ccrr_count + csa_count; }

  bool operator==(const SimReport&) const = default;
};

/// Shortest round-trip decimal representation; used everywhere a number must
/// reproduce byte-identically.
inline std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, end);
}

namespace sim_detail {

constexpr std::uint64_t kStreamIos = 1;
constexpr std::uint64_t kStreamCcrr = 2;
constexpr std::uint64_t kStreamCsa = 3;
constexpr std::uint64_t kStreamIncoming = 4;

class Runner {
 public:
  Runner(const ScenarioConfig& cfg, std::uint64_t seed, double horizon, const TraceSink& trace)
      : cfg_(cfg),
        params_(cfg.protocol_params()),
        horizon_(horizon),
        device_(cfg.timer.t_p),
        registrar_(cfg.timer.t_p),
        ios_stream_(seed, kStreamIos),
        ccrr_stream_(seed, kStreamCcrr),
        csa_stream_(seed, kStreamCsa),
        incoming_stream_(seed, kStreamIncoming),
        trace_(trace) {
    monitor_.publish_interval = params_.publish_interval;
  }

  SimReport run() {
    // Registration is established at t=0; both timers start a full period out.
    queue_.push(device_.timer.expiry, EventKind::TimerExpiry, Entity::Device);
    queue_.push(registrar_.timer.expiry, EventKind::TimerExpiry, Entity::Registrar);
    arm(EventKind::IosArrival, Entity::Device, ios_stream_, cfg_.rates.lambda_ios, 0.0);
    arm(EventKind::CcrrArrival, Entity::Device, ccrr_stream_, cfg_.rates.lambda_ccrr, 0.0);
    arm(EventKind::CsaArrival, Entity::Device, csa_stream_, cfg_.rates.lambda_csa, 0.0);
    arm(EventKind::IncomingSession, Entity::SessionSource, incoming_stream_,
        cfg_.detach.incoming_rate, 0.0);
    if (cfg_.detach.time) queue_.push(*cfg_.detach.time, EventKind::Detach, Entity::Device);

    while (!queue_.empty()) {
      const SimEvent ev = queue_.pop();
      if (ev.time > horizon_) break;
      dispatch(ev);
    }

    report_.total_power = device_.cumulative_power;
    report_.horizon = horizon_;
    report_.trace_digest = digest_.value();
    return report_;
  }

 private:
  void arm(EventKind kind, Entity entity, RngStream& stream, double rate, double now) {
    if (rate > 0) queue_.push(now + sample_exponential(stream, rate), kind, entity);
  }

  void push_refreshes(const Transition& tr) {
    // Device expiry first: an on-time PRR must preempt the registrar's
    // equal-instant expiry check.
    if (tr.device_refreshed)
      queue_.push(device_.timer.expiry, EventKind::TimerExpiry, Entity::Device);
    if (tr.registrar_refreshed)
      queue_.push(registrar_.timer.expiry, EventKind::TimerExpiry, Entity::Registrar);
  }

  void executed(const SimEvent& ev, double power) {
    digest_.update(ev.time, ev.kind, ev.entity);
    report_.executed_events += 1;
    if (trace_)
      trace_(TraceRecord{ev.time, ev.kind, ev.entity, device_.timer.expiry,
                         registrar_.timer.expiry, power});
  }

  void dispatch(const SimEvent& ev) {
    const double t = ev.time;
    switch (ev.kind) {
      case EventKind::IosArrival: {
        if (!device_.attached) return;  // detached devices originate nothing
        const Transition tr = on_ios(params_, device_, registrar_, t);
        report_.ios_count += 1;
        if (tr.device_refreshed) report_.checkpoint_count += 1;
        push_refreshes(tr);
        executed(ev, tr.power);
        arm(ev.kind, ev.entity, ios_stream_, cfg_.rates.lambda_ios, t);
        return;
      }
      case EventKind::CcrrArrival: {
        if (!device_.attached) return;
        const Transition tr = on_ccrr(params_, device_, registrar_, t);
        report_.ccrr_count += 1;
        if (tr.device_refreshed) report_.checkpoint_count += 1;
        push_refreshes(tr);
        executed(ev, tr.power);
        arm(ev.kind, ev.entity, ccrr_stream_, cfg_.rates.lambda_ccrr, t);
        return;
      }
      case EventKind::CsaArrival: {
        if (!device_.attached) return;
        const Transition tr = on_csa(params_, device_, monitor_, registrar_, t);
        report_.csa_count += 1;
        if (tr.device_refreshed) report_.checkpoint_count += 1;
        if (tr.registrar_refreshed) report_.publish_count += 1;  // immediate publish
        push_refreshes(tr);
        if (monitor_.pending_access_count > 0 && !monitor_.next_publish) {
          const double boundary = next_publish_boundary(t, params_.publish_interval);
          monitor_.next_publish = boundary;
          queue_.push(boundary, EventKind::PublishTick, Entity::Monitor);
        }
        executed(ev, tr.power);
        arm(ev.kind, ev.entity, csa_stream_, cfg_.rates.lambda_csa, t);
        return;
      }
      case EventKind::TimerExpiry: {
        if (ev.entity == Entity::Device) {
          if (!device_.attached) return;
          if (t != device_.timer.expiry) return;  // superseded by a later refresh
          const Transition tr = on_device_timer_expiry(params_, device_, registrar_, t);
          report_.prr_count += 1;
          push_refreshes(tr);
          executed(ev, tr.power);
          return;
        }
        if (registrar_.registration != Registration::Registered) return;
        if (t != registrar_.timer.expiry) return;
        // A publish landing exactly on the expiry instant counts as an
        // on-time refresh, like an on-time re-registration does.
        if (monitor_.next_publish && *monitor_.next_publish == t &&
            monitor_.pending_access_count > 0)
          return;
        on_registrar_timer_expiry(registrar_, t);
        report_.detach_detected_at = t;
        executed(ev, 0.0);
        return;
      }
      case EventKind::PublishTick: {
        if (monitor_publish(monitor_, registrar_, t)) {
          report_.publish_count += 1;
          queue_.push(registrar_.timer.expiry, EventKind::TimerExpiry, Entity::Registrar);
          executed(ev, 0.0);
        }
        return;
      }
      case EventKind::IncomingSession: {
        const IncomingOutcome out = on_incoming_session(params_, registrar_, device_, t);
        switch (out.delivery) {
          case Delivery::Rejected:
            return;  // binding already detached; session deliveries stop
          case Delivery::Delivered:
            report_.incoming_count += 1;
            if (out.transition.device_refreshed) report_.checkpoint_count += 1;
            push_refreshes(out.transition);
            executed(ev, out.transition.power);
            arm(ev.kind, ev.entity, incoming_stream_, cfg_.detach.incoming_rate, t);
            return;
          case Delivery::DetachDetected:
            report_.incoming_count += 1;
            report_.detach_detected_at = t;
            executed(ev, 0.0);
            return;
        }
        return;
      }
      case EventKind::Detach: {
        if (!device_.attached) return;
        device_.attached = false;
        report_.detach_time = t;
        report_.registrar_expiry_at_detach = registrar_.timer.expiry;
        executed(ev, 0.0);
        return;
      }
    }
  }

  const ScenarioConfig& cfg_;
  ProtocolParams params_;
  double horizon_;
  DeviceState device_;
  RegistrarState registrar_;
  MonitorState monitor_;
  EventQueue queue_;
  RngStream ios_stream_;
  RngStream ccrr_stream_;
  RngStream csa_stream_;
  RngStream incoming_stream_;
  SimReport report_;
  TraceDigest digest_;
  const TraceSink& trace_;
};

}  // namespace sim_detail

/// Runs one deterministic replication from t=0 to t=horizon. The report (and
/// trace, if a sink is given) is a pure function of (config, seed, horizon).
inline SimReport run(const ScenarioConfig& config, std::uint64_t seed, double horizon,
                     const TraceSink& trace = {}) {
  config.validate();
  if (!(std::isfinite(horizon) && horizon > 0))
    throw std::invalid_argument("run: horizon must be finite and > 0");
  sim_detail::Runner runner(config, seed, horizon, trace);
  return runner.run();
}

/// Trace sink writing the CSV export format:
/// time,kind,entity,device_expiry,registrar_expiry,power_charged
inline TraceSink csv_trace_sink(std::ostream& os) {
  os << "time,kind,entity,device_expiry,registrar_expiry,power_charged\n";
  return [&os](const TraceRecord& r) {
    os << format_double(r.time) << ',' << to_string(r.kind) << ',' << to_string(r.entity) << ','
       << format_double(r.device_expiry) << ',' << format_double(r.registrar_expiry) << ','
       << format_double(r.power_charged) << '\n';
  };
}

}  // namespace lusim

#endif  // LUSIM_SIM_HPP
