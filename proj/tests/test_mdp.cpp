#include "doctest.h"
#include "helpers.hpp"

using namespace mdpmine;
using testutil::make_log;

namespace {

// Fit stats and a small k-means on the log's own prefixes.
struct Fitted {
  NormalizationStats stats;
  KMeansModel kmeans;
};

Fitted fit_artifacts(const EventLog& log, std::size_t k, std::uint64_t seed = 1) {
  Fitted fitted;
  fitted.stats = fit_stats(log);
  const auto vectors = testutil::all_prefix_vectors(log, fitted.stats);
  std::set<std::vector<double>> distinct;
  for (const auto& v : vectors) distinct.insert(v.values);
  KMeansOptions opts;
  opts.k = std::min(k, distinct.size());
  opts.seed = seed;
  fitted.kmeans = kmeans_fit(vectors, opts);
  return fitted;
}

}  // namespace

TEST_CASE("ten identical traces give a two-edge chain with probability 1") {
  std::vector<std::pair<std::vector<std::string>, double>> rows(
      10, {{"A", "B"}, 1.0});
  const EventLog log = make_log(rows, {"A"});
  const auto fitted = fit_artifacts(log, 1);
  const Mdp mdp = build_mdp(log, fitted.kmeans, fitted.stats);

  REQUIRE(mdp.edges.size() == 2);
  for (const auto& edge : mdp.edges) {
    CHECK(edge.count == 10);
    CHECK(edge.probability == doctest::Approx(1.0));
  }
  CHECK(mdp.edges[0].source == State::start());
  CHECK(mdp.edges[0].target == State{"A", kStartCluster});
  CHECK(mdp.edges[1].target.last_activity == "B");
  CHECK(mdp.terminals.count(mdp.edges[1].target) == 1);
  CHECK(validate(mdp).ok());
}

TEST_CASE("branching counts turn into 0.75 / 0.25 transition fractions") {
  const EventLog log = make_log(
      {{{"A", "B"}, 0.0}, {{"A", "B"}, 0.0}, {{"A", "B"}, 0.0}, {{"A", "C"}, 0.0}},
      {"A"});
  const auto fitted = fit_artifacts(log, 1);  // one cluster: length-1 prefixes coincide
  const Mdp mdp = build_mdp(log, fitted.kmeans, fitted.stats);

  // Per action the edge probability is conditional (single target: 1); the
  // 3:1 split of the hand log shows up in the occurrence counts, i.e. the
  // fraction of traces moving to each successor state.
  const State a_state{"A", kStartCluster};
  CHECK(mdp.occurrences(a_state, "B") == 3);
  CHECK(mdp.occurrences(a_state, "C") == 1);
  double p_b = 0.0, p_c = 0.0;
  std::int64_t out_total = 0;
  for (const auto& edge : mdp.edges) {
    if (!(edge.source == a_state)) continue;
    out_total += edge.count;
    CHECK(edge.probability == doctest::Approx(1.0));
  }
  for (const auto& edge : mdp.edges) {
    if (!(edge.source == a_state)) continue;
    const double marginal =
        static_cast<double>(edge.count) / static_cast<double>(out_total);
    if (edge.target.last_activity == "B") p_b = marginal;
    if (edge.target.last_activity == "C") p_c = marginal;
  }
  CHECK(p_b == doctest::Approx(0.75));
  CHECK(p_c == doctest::Approx(0.25));
}

TEST_CASE("final edges average the trace rewards") {
  const EventLog log = make_log(
      {{{"A", "B"}, 100.0}, {{"A", "B"}, 100.0}, {{"A", "B"}, 0.0}, {{"A", "B"}, 0.0}},
      {"A"});
  const auto fitted = fit_artifacts(log, 1);
  const Mdp mdp = build_mdp(log, fitted.kmeans, fitted.stats);
  REQUIRE(mdp.edges.size() == 2);
  CHECK(mdp.edges[0].reward == doctest::Approx(0.0));  // proper prefixes only
  CHECK(mdp.edges[1].reward == doctest::Approx(50.0));
  CHECK(mdp.edges[1].reward_samples == 4);
}

TEST_CASE("state_of matches the state equation") {
  const EventLog log = make_log({{{"A", "B", "C"}, 1.0}, {{"A", "C"}, 0.0}}, {"A"});
  const auto fitted = fit_artifacts(log, 2);
  const Trace& trace = log.traces[0];

  CHECK(state_of(trace, 0, fitted.kmeans, fitted.stats) == State::start());
  CHECK(state_of(trace, 1, fitted.kmeans, fitted.stats) == State{"A", kStartCluster});

  const auto expected_cluster = static_cast<std::int32_t>(
      kmeans_assign(fitted.kmeans, encode(trace, 1, fitted.stats)));
  CHECK(state_of(trace, 2, fitted.kmeans, fitted.stats) ==
        State{"B", expected_cluster});

  const std::vector<std::string> ongoing = {"A", "B"};
  CHECK(state_of_ongoing(ongoing, fitted.kmeans, fitted.stats) ==
        State{"B", expected_cluster});

  const Trace stranger = testutil::make_trace("x", {"Z", "Z"}, 0.0);
  CHECK_THROWS_AS(state_of(stranger, 1, fitted.kmeans, fitted.stats),
                  UnknownActivityError);
}

TEST_CASE("states that both end and continue get an END pseudo-move") {
  const EventLog log = make_log({{{"A"}, 5.0}, {{"A", "B"}, 1.0}}, {"A"});
  const auto fitted = fit_artifacts(log, 1);
  const Mdp mdp = build_mdp(log, fitted.kmeans, fitted.stats);

  const State a_state{"A", kStartCluster};
  CHECK(mdp.terminals.count(a_state) == 0);
  CHECK(mdp.occurrences(a_state, kEndAction) == 1);
  bool found_pseudo = false;
  for (const auto& edge : mdp.edges) {
    if (edge.pseudo) {
      found_pseudo = true;
      CHECK(edge.source == a_state);
      CHECK(edge.target == State::end());
      CHECK(edge.probability == 1.0);
    }
  }
  CHECK(found_pseudo);
  CHECK(mdp.terminals.count(State::end()) == 1);
  CHECK(validate(mdp).ok());
}

TEST_CASE("replay conservation: real edge counts sum to total event count") {
  std::mt19937_64 rng(101);
  for (int round = 0; round < 30; ++round) {
    const EventLog log = testutil::random_mini_log(rng);
    const auto fitted = fit_artifacts(log, 3, round);
    const Mdp mdp = build_mdp(log, fitted.kmeans, fitted.stats);
    std::int64_t edge_total = 0;
    for (const auto& edge : mdp.edges) {
      if (!edge.pseudo) edge_total += edge.count;
    }
    std::int64_t event_total = 0;
    for (const auto& trace : log.traces) {
      event_total += static_cast<std::int64_t>(trace.events.size());
    }
    CHECK(edge_total == event_total);
    CHECK(validate(mdp).ok());
  }
}

TEST_CASE("build is deterministic") {
  std::mt19937_64 rng(55);
  const EventLog log = testutil::random_mini_log(rng);
  const auto fitted = fit_artifacts(log, 2);
  const Mdp a = build_mdp(log, fitted.kmeans, fitted.stats);
  const Mdp b = build_mdp(log, fitted.kmeans, fitted.stats);
  const auto fa = testutil::flatten(a);
  const auto fb = testutil::flatten(b);
  REQUIRE(fa.edges.size() == fb.edges.size());
  for (std::size_t i = 0; i < fa.edges.size(); ++i) {
    CHECK(fa.edges[i].count == fb.edges[i].count);
    CHECK(fa.edges[i].probability == fb.edges[i].probability);
    CHECK(fa.edges[i].reward == fb.edges[i].reward);
  }
}

TEST_CASE("build equals the brute-force oracle on random mini-logs, both modes") {
  std::mt19937_64 rng(2024);
  for (int round = 0; round < 60; ++round) {
    const EventLog log = testutil::random_mini_log(rng);
    const auto fitted = fit_artifacts(log, 3, round * 7 + 1);
    for (const auto mode :
         {RewardAttribution::Arrival, RewardAttribution::LastAgent}) {
      MdpBuildOptions opts;
      opts.attribution = mode;
      const Mdp mdp = build_mdp(log, fitted.kmeans, fitted.stats, opts);
      const auto got = testutil::flatten(mdp);
      const auto want = testutil::oracle_mdp(log, fitted.kmeans, fitted.stats, mode);

      REQUIRE(got.edges.size() == want.edges.size());
      for (std::size_t i = 0; i < got.edges.size(); ++i) {
        CAPTURE(round);
        CHECK(got.edges[i].source == want.edges[i].source);
        CHECK(got.edges[i].action == want.edges[i].action);
        CHECK(got.edges[i].target == want.edges[i].target);
        CHECK(got.edges[i].count == want.edges[i].count);
        CHECK(got.edges[i].probability ==
              doctest::Approx(want.edges[i].probability).epsilon(1e-12));
        CHECK(got.edges[i].reward ==
              doctest::Approx(want.edges[i].reward).epsilon(1e-9));
        CHECK(got.edges[i].reward_samples == want.edges[i].reward_samples);
        CHECK(got.edges[i].pseudo == want.edges[i].pseudo);
      }
      CHECK(got.terminals == want.terminals);
      CHECK(got.occurrence == want.occurrence);
    }
  }
}

TEST_CASE("last-agent attribution credits the decisive agent edge") {
  // E(env), A(agent), E, A: the trace reward lands on the first A edge,
  // whose triple reappears as the footnote correspondence of the full trace.
  const EventLog log = make_log({{{"E", "A", "E", "A"}, 12.0}}, {"A"});
  const auto fitted = fit_artifacts(log, 1);
  MdpBuildOptions opts;
  opts.attribution = RewardAttribution::LastAgent;
  const Mdp mdp = build_mdp(log, fitted.kmeans, fitted.stats, opts);

  const State e1{"E", kStartCluster};
  double credited = 0.0;
  std::int64_t samples = 0;
  for (const auto& edge : mdp.edges) {
    if (edge.source == e1 && edge.action == "A") {
      credited = edge.reward;
      samples = edge.reward_samples;
    } else {
      CHECK(edge.reward == 0.0);
    }
  }
  CHECK(credited == doctest::Approx(12.0));
  CHECK(samples == 1);
}

TEST_CASE("validate reports corruption") {
  const EventLog log = make_log({{{"A", "B"}, 1.0}}, {"A"});
  const auto fitted = fit_artifacts(log, 1);
  Mdp mdp = build_mdp(log, fitted.kmeans, fitted.stats);
  CHECK(validate(mdp).ok());

  SUBCASE("broken probability normalization") {
    mdp.edges[0].probability = 0.5;
    const auto report = validate(mdp);
    REQUIRE_FALSE(report.ok());
    CHECK(report.violations[0].find("sum to") != std::string::npos);
  }
  SUBCASE("orphan non-terminal state") {
    mdp.states.push_back(State{"Z", 9});
    std::sort(mdp.states.begin(), mdp.states.end());
    const auto report = validate(mdp);
    REQUIRE_FALSE(report.ok());
    bool found = false;
    for (const auto& v : report.violations) {
      if (v.find("without outgoing edges") != std::string::npos) found = true;
    }
    CHECK(found);
  }
}

TEST_CASE("build rejects mismatched artifacts and reserved labels") {
  const EventLog log = make_log({{{"A", "B"}, 1.0}}, {"A"});
  const auto fitted = fit_artifacts(log, 1);

  NormalizationStats other_stats = fitted.stats;
  other_stats.alphabet_order = {"A", "B", "C"};
  CHECK_THROWS_AS(build_mdp(log, fitted.kmeans, other_stats), EncodingMismatchError);

  KMeansModel bad_dim = fitted.kmeans;
  for (auto& c : bad_dim.centroids) c.push_back(0.0);
  CHECK_THROWS_AS(build_mdp(log, bad_dim, fitted.stats), EncodingMismatchError);

  CHECK_THROWS_AS(build_mdp(EventLog{}, fitted.kmeans, fitted.stats), EmptyLogError);
}

TEST_CASE("dot export names states and marks agent edges") {
  const EventLog log = make_log({{{"A", "B"}, 1.0}}, {"A"});
  const auto fitted = fit_artifacts(log, 1);
  const Mdp mdp = build_mdp(log, fitted.kmeans, fitted.stats);
  const std::string dot = to_dot(mdp);
  CHECK(dot.find("digraph") != std::string::npos);
  CHECK(dot.find("<START>") != std::string::npos);
  CHECK(dot.find("color=blue") != std::string::npos);
}
