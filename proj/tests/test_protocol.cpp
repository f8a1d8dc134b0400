#include <catch2/catch_amalgamated.hpp>

#include "lusim/protocol.hpp"
#include "lusim/scenario.hpp"

using namespace lusim;

namespace {

ProtocolParams params_for(PolicyKind kind, double publish_interval = 0.0,
                          std::optional<bool> ios_refreshes = {}) {
  ScenarioConfig cfg;
  cfg.policy = Policy(kind, publish_interval);
  cfg.ios_refreshes = ios_refreshes;
  return cfg.protocol_params();
}

struct Entities {
  DeviceState device;
  RegistrarState registrar;
  MonitorState monitor;
  explicit Entities(double t_p, double publish_interval = 0.0)
      : device(t_p), registrar(t_p) {
    monitor.publish_interval = publish_interval;
  }
};

}  // namespace

TEST_CASE("session events refresh both timers under cloud-aware", "[protocol]") {
  const auto p = params_for(PolicyKind::CloudAware);
  Entities e(1.0);

  auto tr = on_ios(p, e.device, e.registrar, 0.4);
  CHECK(e.device.timer.expiry == 1.4);
  CHECK(e.registrar.timer.expiry == 1.4);
  CHECK(tr.power == 970.0);

  on_ios(p, e.device, e.registrar, 0.9);  // latest refresh wins
  CHECK(e.device.timer.expiry == 1.9);
  CHECK(e.registrar.timer.expiry == 1.9);
}

TEST_CASE("standard baseline charges sessions without deferring the timer", "[protocol]") {
  const auto p = params_for(PolicyKind::StandardIms);
  Entities e(1.0);
  const auto tr = on_ios(p, e.device, e.registrar, 0.4);
  CHECK(tr.power == 970.0);
  CHECK_FALSE(tr.device_refreshed);
  CHECK(e.device.timer.expiry == 1.0);
  CHECK(e.registrar.timer.expiry == 1.0);
  CHECK(e.device.cumulative_power == 970.0);
}

TEST_CASE("session refresh under the standard policy is one flag away", "[protocol]") {
  const auto p = params_for(PolicyKind::StandardIms, 0.0, true);
  Entities e(1.0);
  on_ios(p, e.device, e.registrar, 0.4);
  CHECK(e.device.timer.expiry == 1.4);
  CHECK(e.registrar.timer.expiry == 1.4);
}

TEST_CASE("cloud access refreshes immediately when publishes are unbatched", "[protocol]") {
  const auto p = params_for(PolicyKind::CloudAware, 0.0);
  Entities e(1.0);
  const auto tr = on_csa(p, e.device, e.monitor, e.registrar, 1.2);
  CHECK(e.device.timer.expiry == 2.2);
  CHECK(e.registrar.timer.expiry == 2.2);
  CHECK(tr.power == 10.0);
  CHECK(e.monitor.pending_access_count == 0);
}

TEST_CASE("batched access defers only the registrar refresh to the boundary", "[protocol]") {
  const auto p = params_for(PolicyKind::CloudAware, 0.5);
  Entities e(1.0, 0.5);
  on_csa(p, e.device, e.monitor, e.registrar, 1.2);
  CHECK(e.device.timer.expiry == 2.2);          // access instant
  CHECK(e.registrar.timer.expiry == 1.0);       // untouched until publish
  CHECK(e.monitor.pending_access_count == 1);
  CHECK(next_publish_boundary(1.2, 0.5) == 1.5);

  CHECK(monitor_publish(e.monitor, e.registrar, 1.5));
  CHECK(e.registrar.timer.expiry == 2.5);       // publish instant + t_p
  CHECK(e.monitor.pending_access_count == 0);
}

TEST_CASE("standard policy ignores cloud accesses entirely", "[protocol]") {
  const auto p = params_for(PolicyKind::StandardIms);
  Entities e(1.0);
  const auto tr = on_csa(p, e.device, e.monitor, e.registrar, 1.2);
  CHECK(tr.power == 0.0);
  CHECK_FALSE(tr.device_refreshed);
  CHECK(e.device.timer.expiry == 1.0);
  CHECK(e.registrar.timer.expiry == 1.0);
  CHECK(e.device.cumulative_power == 0.0);
}

TEST_CASE("re-registration refreshes identically in both policies", "[protocol]") {
  for (PolicyKind kind : {PolicyKind::StandardIms, PolicyKind::CloudAware}) {
    const auto p = params_for(kind);
    Entities e(1.0);
    const auto tr = on_ccrr(p, e.device, e.registrar, 2.0);
    CHECK(e.device.timer.expiry == 3.0);
    CHECK(e.registrar.timer.expiry == 3.0);
    CHECK(tr.power == 325.0);
  }
  // latest refresh wins across event kinds
  const auto p = params_for(PolicyKind::CloudAware);
  Entities e(1.0);
  on_ccrr(p, e.device, e.registrar, 2.0);
  on_csa(p, e.device, e.monitor, e.registrar, 2.1);
  CHECK(e.device.timer.expiry == 3.1);
  CHECK(e.registrar.timer.expiry == 3.1);
}

TEST_CASE("periodic re-registration refreshes both timers and charges the device",
          "[protocol]") {
  const auto p = params_for(PolicyKind::CloudAware);
  Entities e(1.0);
  on_ios(p, e.device, e.registrar, 0.6);
  CHECK(e.device.timer.expiry == 1.6);  // periodic event put off by the session
  const auto tr = on_device_timer_expiry(p, e.device, e.registrar, 1.6);
  CHECK(e.device.timer.expiry == 2.6);
  CHECK(e.registrar.timer.expiry == 2.6);
  CHECK(tr.power == 325.0);
}

TEST_CASE("failed delivery to a silent device detects the detach", "[protocol]") {
  const auto p = params_for(PolicyKind::CloudAware);
  Entities e(1.0);
  on_ccrr(p, e.device, e.registrar, 2.5);  // registrar expiry 3.5
  e.device.attached = false;               // silent detach at t = 2.0 < 2.8

  const auto out = on_incoming_session(p, e.registrar, e.device, 2.8);
  CHECK(out.delivery == Delivery::DetachDetected);
  CHECK(e.registrar.registration == Registration::Detached);
  REQUIRE(e.registrar.detach_detected_at.has_value());
  CHECK(*e.registrar.detach_detected_at == 2.8);

  // a later attempt is rejected without state change
  const auto again = on_incoming_session(p, e.registrar, e.device, 3.1);
  CHECK(again.delivery == Delivery::Rejected);
  CHECK(*e.registrar.detach_detected_at == 2.8);
}

TEST_CASE("without sessions the registrar timer detects the detach at expiry", "[protocol]") {
  Entities e(1.0);
  on_ccrr(params_for(PolicyKind::CloudAware), e.device, e.registrar, 2.5);
  e.device.attached = false;
  on_registrar_timer_expiry(e.registrar, 3.5);
  CHECK(e.registrar.registration == Registration::Detached);
  CHECK(*e.registrar.detach_detected_at == 3.5);
}

TEST_CASE("delivery to an attached device acts like any session", "[protocol]") {
  const auto p = params_for(PolicyKind::CloudAware);
  Entities e(1.0);
  const auto out = on_incoming_session(p, e.registrar, e.device, 0.7);
  CHECK(out.delivery == Delivery::Delivered);
  CHECK(e.device.timer.expiry == 1.7);
  CHECK(e.registrar.timer.expiry == 1.7);
  CHECK(out.transition.power == 970.0);
}

TEST_CASE("publish collapses pending accesses into one refresh", "[protocol]") {
  Entities e(1.0, 0.5);
  e.monitor.pending_access_count = 3;
  CHECK(monitor_publish(e.monitor, e.registrar, 4.5));
  CHECK(e.registrar.timer.expiry == 5.5);
  CHECK(e.monitor.pending_access_count == 0);

  // empty boundary publishes nothing
  CHECK_FALSE(monitor_publish(e.monitor, e.registrar, 5.0));
  CHECK(e.registrar.timer.expiry == 5.5);
}

TEST_CASE("publish against a detached binding is dropped", "[protocol]") {
  Entities e(1.0, 0.5);
  e.registrar.mark_detached(2.0);
  e.monitor.pending_access_count = 2;
  CHECK_FALSE(monitor_publish(e.monitor, e.registrar, 2.5));
  CHECK(e.registrar.timer.expiry == 1.0);
  CHECK(e.monitor.pending_access_count == 0);
}

TEST_CASE("publish boundaries are fixed-phase multiples of the interval", "[protocol]") {
  CHECK(next_publish_boundary(1.2, 0.5) == 1.5);
  CHECK(next_publish_boundary(1.5, 0.5) == 1.5);  // already on a boundary
  CHECK(next_publish_boundary(0.01, 0.5) == 0.5);
  CHECK(next_publish_boundary(7.3, 2.0) == 8.0);
}
