#include <cmath>
#include <fstream>

#include "doctest.h"
#include "helpers.hpp"
#include "mdpmine/simgen.hpp"

using namespace mdpmine;
using testutil::toy_loan_model;

TEST_CASE("generation is deterministic under the seed") {
  const ProcessModel model = toy_loan_model();
  const EventLog a = generate_log(model, 50, 42);
  const EventLog b = generate_log(model, 50, 42);
  REQUIRE(a.traces.size() == b.traces.size());
  for (std::size_t i = 0; i < a.traces.size(); ++i) {
    REQUIRE(a.traces[i].events.size() == b.traces[i].events.size());
    CHECK(*a.traces[i].reward == *b.traces[i].reward);
    for (std::size_t j = 0; j < a.traces[i].events.size(); ++j) {
      CHECK(a.traces[i].events[j].activity == b.traces[i].events[j].activity);
      CHECK(a.traces[i].events[j].timestamp_ms == b.traces[i].events[j].timestamp_ms);
    }
  }
  const EventLog c = generate_log(model, 50, 43);
  bool any_difference = false;
  for (std::size_t i = 0; i < c.traces.size() && !any_difference; ++i) {
    any_difference = c.traces[i].events.size() != a.traces[i].events.size();
  }
  CHECK(any_difference);
}

TEST_CASE("zero preaccept probability means no accepted offers") {
  ProcessModel model = toy_loan_model();
  model.preaccept_probability = 0.0;
  const EventLog log = generate_log(model, 300, 7);
  CHECK(acceptance_rate(log, "accept_offer") == 0.0);
  for (const auto& trace : log.traces) {
    CHECK(*trace.reward <= 0.0);
  }
}

TEST_CASE("generated traces satisfy the model's control flow") {
  const ProcessModel model = toy_loan_model();
  const EventLog log = generate_log(model, 200, 3);
  for (const auto& trace : log.traces) {
    const auto violations = replay_violations(model, trace);
    CAPTURE(trace.case_id);
    CHECK(violations.empty());
  }
}

TEST_CASE("replay validator flags foreign traces") {
  const ProcessModel model = toy_loan_model();
  const Trace bad = testutil::make_trace(
      "bad", {"submit_application", "accept_offer"});  // accept without an offer path
  CHECK_FALSE(replay_violations(model, bad).empty());
}

TEST_CASE("simulated rewards equal the KPI recomputed by enrich") {
  const ProcessModel model = toy_loan_model();
  EventLog log = generate_log(model, 100, 11);
  const std::vector<double> sim_rewards = [&] {
    std::vector<double> out;
    for (const auto& trace : log.traces) out.push_back(*trace.reward);
    return out;
  }();
  const EventLog enriched = enrich(log, model.kpi);
  for (std::size_t i = 0; i < enriched.traces.size(); ++i) {
    CHECK(*enriched.traces[i].reward ==
          doctest::Approx(sim_rewards[i]).epsilon(1e-9));
  }
}

TEST_CASE("acceptance rate is monotone in the preaccept probability") {
  ProcessModel model = toy_loan_model();
  double previous = -1.0;
  for (double p : {0.0, 0.3, 0.6, 0.9}) {
    model.preaccept_probability = p;
    const EventLog log = generate_log(model, 2000, 5);
    const double rate = acceptance_rate(log, "accept_offer");
    CHECK(rate >= previous);
    previous = rate;
  }
}

TEST_CASE("a policy recommending forbidden activities fails every trace by exception") {
  ProcessModel model = toy_loan_model();
  model.preaccept_probability = 1.0;  // every case reaches an agent turn
  AgentChooser bad = [](const Trace&, const std::vector<std::string>&) {
    return std::string("withdraw_application");  // environment-owned, never allowed
  };
  const PolicySimResult result = simulate_with_chooser(model, bad, 100, 9);
  CHECK(result.exceptions == 100);
  for (double r : result.rewards) {
    CHECK(r <= 0.0);  // only accumulated labour costs
  }
}

TEST_CASE("an agent that never offers stalls once the environment cannot respond") {
  ProcessModel model = toy_loan_model();
  // The withdraw outcome keeps a tiny response probability alive; silence it
  // so calls alone never trigger the environment.
  model.gateways["g_response"].outcomes[2].min_counts = {{"create_offer", 1}};
  model.preaccept_probability = 1.0;
  AgentChooser caller = [](const Trace&, const std::vector<std::string>&) {
    return std::string("call_customer");
  };
  SimulateOptions opts;
  opts.stall_limit = 50;
  const PolicySimResult result = simulate_with_chooser(model, caller, 20, 1, opts);
  CHECK(result.stalls == 20);
}

TEST_CASE("a chooser replaying a deterministic model matches the unguided average") {
  ProcessModel model = toy_loan_model();
  // Make the model's own agent behaviour deterministic: always offer.
  model.gateways["g_work"].outcomes = {GatewayOutcome{"create_offer", 1.0}};
  model.gateways["g_work"].force_after_visits = 0;

  const std::size_t n = 4000;
  const EventLog baseline = generate_log(model, n, 21);
  double base_mean = 0.0;
  for (const auto& trace : baseline.traces) base_mean += *trace.reward;
  base_mean /= static_cast<double>(n);
  double base_var = 0.0;
  for (const auto& trace : baseline.traces) {
    base_var += (*trace.reward - base_mean) * (*trace.reward - base_mean);
  }
  base_var /= static_cast<double>(n - 1);

  AgentChooser mimic = [](const Trace&, const std::vector<std::string>&) {
    return std::string("create_offer");
  };
  const PolicySimResult result = simulate_with_chooser(model, mimic, n, 22);
  CHECK(result.exceptions == 0);
  const double se = std::sqrt(base_var / n + result.stddev() * result.stddev() / n);
  CHECK(std::abs(result.mean() - base_mean) <= 3.0 * se);
}

TEST_CASE("model validation catches structural defects") {
  SUBCASE("probabilities must sum to one") {
    ProcessModel model = toy_loan_model();
    model.gateways["g_work"].outcomes[0].probability = 0.9;
    CHECK_THROWS_AS(model.validate(), InvalidModelError);
  }
  SUBCASE("references must resolve") {
    ProcessModel model = toy_loan_model();
    model.activities["create_offer"].next = "nowhere";
    CHECK_THROWS_AS(model.validate(), InvalidModelError);
  }
  SUBCASE("the end must be reachable") {
    ProcessModel model = toy_loan_model();
    for (auto& [name, spec] : model.activities) {
      if (spec.next == kEndNode) spec.next = "g_work";
    }
    CHECK_THROWS_AS(model.validate(), InvalidModelError);
  }
  SUBCASE("gateway-only cycles are rejected") {
    ProcessModel model = toy_loan_model();
    GatewaySpec loop;
    loop.name = "g_loop";
    loop.kind = GatewaySpec::Kind::Chance;
    loop.outcomes = {GatewayOutcome{"g_loop", 1.0}};
    model.gateways["g_loop"] = std::move(loop);
    model.activities["submit_application"].next = "g_loop";
    CHECK_THROWS_AS(model.validate(), InvalidModelError);
  }
}

TEST_CASE("generation refuses models that never terminate") {
  ProcessModel model = toy_loan_model();
  model.preaccept_probability = 1.0;
  auto& work = model.gateways["g_work"];
  work.outcomes = {GatewayOutcome{"create_offer", 1.0}};
  work.force_after_visits = 0;  // no valve
  auto& resp = model.gateways["g_response"];
  resp.outcomes = {GatewayOutcome{}};  // the environment never acts
  resp.outcomes[0].bias = 1.0;
  CHECK_THROWS_AS(generate_log(model, 5, 1), InvalidModelError);
}

TEST_CASE("model presets round-trip through JSON") {
  const ProcessModel model = toy_loan_model();
  const std::string text = model.to_json();
  const auto dir = std::filesystem::temp_directory_path() / "mdpmine_tests";
  std::filesystem::create_directories(dir);
  const auto path = dir / "toy_model.json";
  std::ofstream(path) << text;
  const ProcessModel loaded = ProcessModel::from_json_file(path);
  CHECK(loaded.activities.size() == model.activities.size());
  CHECK(loaded.gateways.size() == model.gateways.size());
  CHECK(loaded.preaccept_probability == model.preaccept_probability);
  const EventLog a = generate_log(model, 30, 4);
  const EventLog b = generate_log(loaded, 30, 4);
  for (std::size_t i = 0; i < a.traces.size(); ++i) {
    CHECK(a.traces[i].events.size() == b.traces[i].events.size());
    CHECK(*a.traces[i].reward == *b.traces[i].reward);
  }
}

TEST_CASE("simulate_with_policy rejects foreign alphabets") {
  const ProcessModel model = toy_loan_model();
  const EventLog tiny = testutil::make_log({{{"x", "y"}, 1.0}, {{"x", "y"}, 2.0}}, {"x"});
  const auto bundle = testutil::train_bundle(tiny, 2);
  CHECK_THROWS_AS(simulate_with_policy(model, bundle.view(), 10, 1),
                  IncompatibleAlphabetError);
}
