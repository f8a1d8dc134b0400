#ifndef LUSIM_PROTOCOL_HPP
#define LUSIM_PROTOCOL_HPP

#include <cmath>
#include <optional>

#include "lusim/model.hpp"

namespace lusim {

/// A registration timer as held by one entity. expiry == last_refresh + t_p
/// at all times; refreshes only move it forward because virtual time does.
struct TimerState {
  double t_p;
  double last_refresh = 0.0;
  double expiry;

  explicit TimerState(double tp) : t_p(tp), expiry(tp) {}

  void refresh(double t) {
    last_refresh = t;
    expiry = t + t_p;
  }
};

struct DeviceState {
  TimerState timer;
  bool attached = true;
  double cumulative_power = 0.0;

  explicit DeviceState(double t_p) : timer(t_p) {}

  void charge(double power) { cumulative_power += power; }
};

enum class Registration { Registered, Detached };

/// S-CSCF and P-CSCF hold identical timers in every scenario, so they are
/// collapsed into one registrar timer authority.
struct RegistrarState {
  TimerState timer;
  Registration registration = Registration::Registered;
  std::optional<double> detach_detected_at;

  explicit RegistrarState(double t_p) : timer(t_p) {}

  void mark_detached(double t) {
    registration = Registration::Detached;
    detach_detected_at = t;
  }
};

/// Cloud Service Monitor: observes accesses and publishes device liveness to
/// the registrar, batched over fixed-phase boundaries when publish_interval
/// is non-zero.
struct MonitorState {
  double publish_interval = 0.0;
  int pending_access_count = 0;
  std::optional<double> next_publish;
};

/// Per-run protocol behavior resolved from policy and cost model.
struct ProtocolParams {
  PolicyKind policy = PolicyKind::StandardIms;
  bool ios_refreshes = false;
  double publish_interval = 0.0;
  double cost_ios = 0.0;
  double cost_ccrr = 0.0;
  double cost_prr = 0.0;
  double cost_csa = 0.0;
};

/// What one executed event did: power charged to the device and which timers
/// it refreshed.
struct Transition {
  double power = 0.0;
  bool device_refreshed = false;
  bool registrar_refreshed = false;
};

namespace protocol_detail {
inline void refresh_both(DeviceState& device, RegistrarState& registrar, double t,
                         Transition& tr) {
  device.timer.refresh(t);
  tr.device_refreshed = true;
  if (registrar.registration == Registration::Registered) {
    registrar.timer.refresh(t);
    tr.registrar_refreshed = true;
  }
}
}  // namespace protocol_detail

/// Incoming or outgoing session completed successfully. Charges the session
/// exchange; refreshes both timers when the policy counts session activity as
/// a liveness signal.
inline Transition on_ios(const ProtocolParams& p, DeviceState& device, RegistrarState& registrar,
                         double t) {
  Transition tr;
  tr.power = p.cost_ios;
  device.charge(tr.power);
  if (p.ios_refreshes) protocol_detail::refresh_both(device, registrar, t, tr);
  return tr;
}

/// Cloud service access. Under CloudAware the device timer refreshes at the
/// access instant (timer carried in the service response) and the registrar
/// either refreshes immediately (publish_interval == 0) or waits for the
/// monitor's next publish boundary. StandardIMS ignores the access: no timer
/// movement and no charge on the update path.
inline Transition on_csa(const ProtocolParams& p, DeviceState& device, MonitorState& monitor,
                         RegistrarState& registrar, double t) {
  Transition tr;
  if (p.policy == PolicyKind::StandardIms) return tr;
  tr.power = p.cost_csa;
  device.charge(tr.power);
  device.timer.refresh(t);
  tr.device_refreshed = true;
  if (p.publish_interval == 0.0) {
    if (registrar.registration == Registration::Registered) {
      registrar.timer.refresh(t);
      tr.registrar_refreshed = true;
    }
  } else {
    monitor.pending_access_count += 1;
  }
  return tr;
}

/// Capability-change re-registration: a full exchange in both policies.
inline Transition on_ccrr(const ProtocolParams& p, DeviceState& device, RegistrarState& registrar,
                          double t) {
  Transition tr;
  tr.power = p.cost_ccrr;
  device.charge(tr.power);
  protocol_detail::refresh_both(device, registrar, t, tr);
  return tr;
}

/// Device timer reached zero: periodic re-registration. Caller guarantees the
/// device is attached and t equals the current device expiry.
inline Transition on_device_timer_expiry(const ProtocolParams& p, DeviceState& device,
                                         RegistrarState& registrar, double t) {
  Transition tr;
  tr.power = p.cost_prr;
  device.charge(tr.power);
  protocol_detail::refresh_both(device, registrar, t, tr);
  return tr;
}

/// Registrar timer expired with no refresh arriving: the binding is declared
/// detached. Caller enforces the equal-instant preemption rules (an on-time
/// device re-registration or publish refreshes first).
inline void on_registrar_timer_expiry(RegistrarState& registrar, double t) {
  registrar.mark_detached(t);
}

/// Monitor publish boundary. Collapses all pending accesses into one publish;
/// refreshes the registrar timer only when the binding is still registered
/// (the id check), otherwise the publish is dropped. Returns whether the
/// registrar was refreshed.
inline bool monitor_publish(MonitorState& monitor, RegistrarState& registrar, double t) {
  const bool had_pending = monitor.pending_access_count > 0;
  monitor.pending_access_count = 0;
  monitor.next_publish.reset();
  if (!had_pending) return false;
  if (registrar.registration != Registration::Registered) return false;
  registrar.timer.refresh(t);
  return true;
}

enum class Delivery { Delivered, DetachDetected, Rejected };

struct IncomingOutcome {
  Delivery delivery = Delivery::Rejected;
  Transition transition;
};

/// Network-side session delivery attempt. A registered, attached device
/// answers and the attempt behaves like any successful session; a registered
/// but silently detached device fails the delivery, which is the second way
/// the registrar learns of a detach. Attempts against an already-detached
/// binding are rejected without state change.
inline IncomingOutcome on_incoming_session(const ProtocolParams& p, RegistrarState& registrar,
                                           DeviceState& device, double t) {
  if (registrar.registration != Registration::Registered) return {Delivery::Rejected, {}};
  if (device.attached) return {Delivery::Delivered, on_ios(p, device, registrar, t)};
  registrar.mark_detached(t);
  return {Delivery::DetachDetected, {}};
}

/// First fixed-phase publish boundary at or after t (multiples of interval).
inline double next_publish_boundary(double t, double interval) {
  double boundary = std::ceil(t / interval) * interval;
  if (boundary < t) boundary += interval;
  return boundary;
}

}  // namespace lusim

#endif  // LUSIM_PROTOCOL_HPP
