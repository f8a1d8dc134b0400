#include <catch2/catch_amalgamated.hpp>

#include "lusim/model.hpp"
#include "lusim/rng.hpp"
#include "lusim/scenario.hpp"

using namespace lusim;
using Catch::Matchers::WithinRel;

TEST_CASE("total event rate sums the three arrival rates", "[model]") {
  CHECK(total_event_rate(RateConfig(0.5, 0.5, 0.5)) == 1.5);
  CHECK(total_event_rate(RateConfig(0, 0, 0)) == 0.0);
  CHECK_THAT(total_event_rate(RateConfig(0.3, 0.3, 0.3)), WithinRel(0.9, 1e-12));
}

TEST_CASE("rate config rejects invalid rates", "[model]") {
  CHECK_THROWS_AS(RateConfig(-0.1, 0, 0), std::invalid_argument);
  CHECK_THROWS_AS(RateConfig(0, std::nan(""), 0), std::invalid_argument);
  CHECK_THROWS_AS(RateConfig(0, 0, std::numeric_limits<double>::infinity()),
                  std::invalid_argument);
}

TEST_CASE("timer params require a positive finite length", "[model]") {
  CHECK(TimerParams(0.5).t_p == 0.5);
  CHECK_THROWS_AS(TimerParams(0), std::invalid_argument);
  CHECK_THROWS_AS(TimerParams(-1), std::invalid_argument);
  CHECK_THROWS_AS(TimerParams(std::numeric_limits<double>::infinity()), std::invalid_argument);
}

TEST_CASE("default catalog carries the standard message sizes", "[model]") {
  const auto catalog = MessageCatalog::defaults();
  CHECK(catalog.size_of("REGISTER") == 225);
  CHECK(catalog.size_of("INVITE") == 810);
  CHECK(catalog.size_of("200OK") == 100);
  CHECK(catalog.size_of("ACK") == 60);
  CHECK_THROWS_AS(catalog.size_of("BYE"), std::invalid_argument);
  CHECK_THROWS_AS(MessageCatalog({{"X", 0}}), std::invalid_argument);
}

TEST_CASE("default event costs", "[model]") {
  const auto costs = CostModel::defaults();
  CHECK(event_cost(costs, UpdateEvent::Csa) == 10.0);
  CHECK(event_cost(costs, UpdateEvent::Prr) == 325.0);   // REGISTER + 200OK
  CHECK(event_cost(costs, UpdateEvent::Ios) == 970.0);   // INVITE + 200OK + ACK
  CHECK(event_cost(costs, UpdateEvent::Ccrr) == event_cost(costs, UpdateEvent::Prr));
}

TEST_CASE("cost model validates its references", "[model]") {
  auto catalog = MessageCatalog::defaults();
  CHECK_THROWS_AS(CostModel(catalog, {{UpdateEvent::Prr, {"NO_SUCH"}},
                                      {UpdateEvent::Ccrr, {"REGISTER"}},
                                      {UpdateEvent::Ios, {"INVITE"}}},
                            10.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(CostModel(catalog, {{UpdateEvent::Prr, {}},
                                      {UpdateEvent::Ccrr, {"REGISTER"}},
                                      {UpdateEvent::Ios, {"INVITE"}}},
                            10.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(CostModel(catalog, CostModel::defaults().procedure_messages, -1.0),
                  std::invalid_argument);
}

TEST_CASE("event cost is strictly monotone in catalog sizes", "[model][property]") {
  RngStream rng(0x5EED, 99);
  const auto base = CostModel::defaults();
  for (int i = 0; i < 50; ++i) {
    // bump one random constituent message and expect every procedure using it
    // to get strictly more expensive
    const std::vector<std::string> names{"REGISTER", "INVITE", "200OK", "ACK"};
    const auto& name = names[rng.next_u64() % names.size()];
    const int bump = 1 + static_cast<int>(rng.next_u64() % 500);
    auto entries = base.catalog.entries;
    entries[name] += bump;
    const CostModel bigger(MessageCatalog(entries), base.procedure_messages,
                           base.csa_local_cost);
    for (UpdateEvent e : {UpdateEvent::Prr, UpdateEvent::Ccrr, UpdateEvent::Ios}) {
      const auto& msgs = base.procedure_messages.at(e);
      const bool uses = std::find(msgs.begin(), msgs.end(), name) != msgs.end();
      if (uses)
        CHECK(bigger.cost(e) > base.cost(e));
      else
        CHECK(bigger.cost(e) == base.cost(e));
    }
  }
}

TEST_CASE("total rate is additive under componentwise addition", "[model][property]") {
  RngStream rng(0xADD, 3);
  for (int i = 0; i < 100; ++i) {
    const auto r = [&] { return static_cast<double>(rng.next_u64() % 1000) / 250.0; };
    RateConfig a(r(), r(), r());
    RateConfig b(r(), r(), r());
    RateConfig sum(a.lambda_ios + b.lambda_ios, a.lambda_ccrr + b.lambda_ccrr,
                   a.lambda_csa + b.lambda_csa);
    CHECK_THAT(sum.total(), WithinRel(a.total() + b.total(), 1e-12));
  }
}

TEST_CASE("policy validates publish interval", "[model]") {
  CHECK(Policy(PolicyKind::CloudAware, 0.5).publish_interval == 0.5);
  CHECK_THROWS_AS(Policy(PolicyKind::CloudAware, -0.5), std::invalid_argument);
  CHECK(default_ios_refreshes(PolicyKind::CloudAware));
  CHECK_FALSE(default_ios_refreshes(PolicyKind::StandardIms));
}

TEST_CASE("scenario config json round trip", "[model][config]") {
  ScenarioConfig cfg;
  cfg.rates = RateConfig(0.25, 1.5, 0.75);
  cfg.timer = TimerParams(2.0);
  cfg.policy = Policy(PolicyKind::CloudAware, 0.5);
  cfg.ios_refreshes = false;
  cfg.detach.time = 12.0;
  cfg.detach.incoming_rate = 0.3;

  const auto j = scenario_to_json(cfg);
  const auto back = scenario_from_json(j);
  CHECK(back.rates.lambda_ios == cfg.rates.lambda_ios);
  CHECK(back.rates.lambda_ccrr == cfg.rates.lambda_ccrr);
  CHECK(back.rates.lambda_csa == cfg.rates.lambda_csa);
  CHECK(back.timer.t_p == cfg.timer.t_p);
  CHECK(back.policy.kind == cfg.policy.kind);
  CHECK(back.policy.publish_interval == cfg.policy.publish_interval);
  CHECK(back.ios_refreshes == cfg.ios_refreshes);
  CHECK(back.detach.time == cfg.detach.time);
  CHECK(back.detach.incoming_rate == cfg.detach.incoming_rate);
}

TEST_CASE("partial configs keep defaults and unknown keys are rejected", "[model][config]") {
  const auto cfg = scenario_from_json(nlohmann::json::parse(R"({"rates": {"ios": 1.25}})"));
  CHECK(cfg.rates.lambda_ios == 1.25);
  CHECK(cfg.rates.lambda_ccrr == 0.5);
  CHECK(cfg.timer.t_p == 1.0);
  CHECK(cfg.policy.kind == PolicyKind::StandardIms);
  CHECK(cfg.costs.csa_local_cost == 10.0);

  CHECK_THROWS_AS(scenario_from_json(nlohmann::json::parse(R"({"ratez": {}})")),
                  std::invalid_argument);
  CHECK_THROWS_AS(scenario_from_json(nlohmann::json::parse(R"({"policy": {"kind": "Weird"}})")),
                  std::invalid_argument);
  CHECK_THROWS_AS(scenario_from_json(nlohmann::json::parse(R"({"rates": {"ios": -1}})")),
                  std::invalid_argument);
}

TEST_CASE("strict single-message re-registration pricing is one config edit", "[model][config]") {
  const auto cfg = scenario_from_json(nlohmann::json::parse(
      R"({"costs": {"procedures": {"prr": ["REGISTER"], "ccrr": ["REGISTER"]}}})"));
  CHECK(cfg.costs.cost(UpdateEvent::Prr) == 225.0);
  CHECK(cfg.costs.cost(UpdateEvent::Ccrr) == 225.0);
  CHECK(cfg.costs.cost(UpdateEvent::Ios) == 970.0);
}
