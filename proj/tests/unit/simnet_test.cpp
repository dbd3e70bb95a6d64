#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "twp/analysis.hpp"
#include "twp/simnet.hpp"

using namespace twp;

namespace {

SimConfig two_node_constant(double fwd_ms, double rev_ms, uint64_t ticks) {
  SimConfig cfg;
  cfg.n_nodes = 2;
  cfg.probe_interval_ms = 1000;
  cfg.ticks = ticks;
  cfg.seed = 1;
  cfg.clocks.assign(2, SimClock{});
  LinkModel fwd;
  fwd.delay.constant_ms = fwd_ms;
  LinkModel rev;
  rev.delay.constant_ms = rev_ms;
  cfg.links[{0, 1}] = fwd;
  cfg.links[{1, 0}] = rev;
  return cfg;
}

}  // namespace

TEST_CASE("local clock mapping") {
  CHECK(SimClock{0, 0}.local_time(123.0) == 123);
  CHECK(SimClock{5, 100}.local_time(10000.0) == 10006);
  CHECK(SimClock{-3, 0}.local_time(2.0) == 0);  // clamped at the epoch
}

TEST_CASE("local clock is nondecreasing in true time") {
  SimClock clock{-7.5, 350.0};
  uint64_t prev = 0;
  for (double t = 0; t < 100000; t += 13.7) {
    uint64_t local = clock.local_time(t);
    CHECK(local >= prev);
    prev = local;
  }
}

TEST_CASE("transmit loss behavior") {
  Rng rng(5);
  LinkModel always_lost;
  always_lost.delay.constant_ms = 10;
  always_lost.loss_prob = 1.0;
  for (int i = 0; i < 1000; ++i)
    CHECK_FALSE(transmit(always_lost, 0.0, rng).has_value());

  LinkModel lossless;
  lossless.delay.constant_ms = 50;
  lossless.loss_prob = 0.0;
  for (int i = 0; i < 1000; ++i) {
    auto arrival = transmit(lossless, 100.0, rng);
    REQUIRE(arrival.has_value());
    CHECK(*arrival == doctest::Approx(150.0));
  }
}

TEST_CASE("transmit loss rate sits inside the binomial interval") {
  Rng rng(6);
  LinkModel link;
  link.delay.constant_ms = 10;
  link.loss_prob = 0.5;
  std::size_t lost = 0;
  const std::size_t n = 100000;
  for (std::size_t i = 0; i < n; ++i)
    if (!transmit(link, 0.0, rng)) ++lost;
  CHECK(test::within_binomial_3sigma(lost, n, 0.5));
}

TEST_CASE("sampled delays respect the 1 ms floor") {
  Rng rng(7);
  DelayModel model;
  model.dist = DistParams{DistFamily::Normal, 0, 3.0, 2.0, 0};  // mass < 1
  for (int i = 0; i < 20000; ++i) CHECK(model.sample_delay(rng) >= 1.0);
}

TEST_CASE("constant symmetric links give exact 50 ms RTTs every round") {
  SimConfig cfg = two_node_constant(25, 25, 10);
  SimResult result = run_scenario(cfg);

  auto logs = std::vector<std::vector<LogRecord>>{result.node_records(0),
                                                  result.node_records(1)};
  MeshAnalysis mesh = analyze_mesh(logs, 2);
  CHECK(mesh.total_rounds == 10);
  CHECK(mesh.total_losses == 0);
  std::size_t rtt_samples = 0;
  for (const auto& link : mesh.links)
    for (const auto& [wall, rtt] : link.rtt) {
      CHECK(rtt == doctest::Approx(50.0));
      ++rtt_samples;
    }
  CHECK(rtt_samples == 20);  // both directions of every round
}

TEST_CASE("identical config and seed reproduce byte-identical logs") {
  SimConfig cfg = two_node_constant(25, 40, 50);
  LinkModel noisy;
  noisy.delay.dist = DistParams{DistFamily::Gamma, 4.63062, 43.16537, 0, 0};
  noisy.loss_prob = 0.05;
  cfg.links[{0, 1}] = noisy;
  cfg.links[{1, 0}] = noisy;

  SimResult r1 = run_scenario(cfg);
  SimResult r2 = run_scenario(cfg);
  for (std::size_t node = 0; node < 2; ++node)
    CHECK(r1.node_log_bytes(node) == r2.node_log_bytes(node));

  cfg.seed = 2;
  SimResult r3 = run_scenario(cfg);
  CHECK(r1.node_log_bytes(0) != r3.node_log_bytes(0));
}

TEST_CASE("zero clock error and symmetric links mean zero asymmetry") {
  SimConfig cfg = two_node_constant(30, 30, 25);
  SimResult result = run_scenario(cfg);
  auto logs = std::vector<std::vector<LogRecord>>{result.node_records(0),
                                                  result.node_records(1)};
  MeshAnalysis mesh = analyze_mesh(logs, 2);
  REQUIRE(mesh.pairs.size() == 1);
  REQUIRE_FALSE(mesh.pairs[0].values.empty());
  for (double a : mesh.pairs[0].values) CHECK(a == 0.0);

  for (const auto& round_link : mesh.links) {
    for (const auto& [wall, v] : round_link.oneway)
      CHECK(v == doctest::Approx(30.0));
  }
}

TEST_CASE("per-link delay reordering can overtake earlier sends") {
  // High-variance delays: a later PING may arrive before an earlier one.
  SimConfig cfg;
  cfg.n_nodes = 2;
  cfg.probe_interval_ms = 10;
  cfg.ticks = 400;
  cfg.seed = 9;
  cfg.clocks.assign(2, SimClock{});
  LinkModel wild;
  wild.delay.dist = DistParams{DistFamily::Gamma, 0.9, 300.0, 0, 0};
  cfg.links[{0, 1}] = wild;
  cfg.links[{1, 0}] = wild;
  SimResult result = run_scenario(cfg);

  auto records = result.node_records(1);
  bool inversion = false;
  uint32_t last_seq = 0;
  bool first = true;
  for (const auto& rec : records) {
    if (rec.kind != MessageType::Ping || rec.dir != Direction::Recv) continue;
    if (!first && seq_less_than(rec.seq, last_seq)) inversion = true;
    last_seq = rec.seq;
    first = false;
  }
  CHECK(inversion);
}

TEST_CASE("clock offset shows up as one-way asymmetry but not in RTT") {
  SimConfig cfg = two_node_constant(50, 50, 30);
  cfg.clocks[1].offset_ms = 20.0;  // responder clock runs 20 ms ahead
  SimResult result = run_scenario(cfg);
  auto logs = std::vector<std::vector<LogRecord>>{result.node_records(0),
                                                  result.node_records(1)};
  MeshAnalysis mesh = analyze_mesh(logs, 2);
  for (const auto& link : mesh.links) {
    for (const auto& [wall, rtt] : link.rtt) CHECK(rtt == doctest::Approx(100.0));
    for (const auto& [wall, ow] : link.oneway) {
      if (link.src == 0)
        CHECK(ow == doctest::Approx(70.0));  // 50 + 20 offset
      else
        CHECK(ow == doctest::Approx(30.0));  // 50 - 20 offset
    }
  }
}

TEST_CASE("gamma mesh analysis recovers configured delay means and loss") {
  // Desk-scale version of the full pipeline check; the acceptance suite
  // runs the paper-scale variant.
  SimConfig cfg;
  cfg.n_nodes = 5;
  cfg.probe_interval_ms = 10000;
  cfg.ticks = 1000;
  cfg.seed = 12;
  cfg.clocks.assign(5, SimClock{});
  std::map<std::pair<NodeId, NodeId>, double> true_mean;
  for (NodeId i = 0; i < 5; ++i) {
    for (NodeId j = 0; j < 5; ++j) {
      if (i == j) continue;
      double mean = 60.0 + 17.0 * i + 11.0 * j;
      LinkModel link;
      link.delay.dist =
          DistParams{DistFamily::Gamma, 4.63062, mean / 4.63062, 0, 0};
      link.loss_prob = 0.005;
      cfg.links[{i, j}] = link;
      true_mean[{i, j}] = mean;
    }
  }

  SimResult result = run_scenario(cfg);
  std::vector<std::vector<LogRecord>> logs;
  for (std::size_t node = 0; node < 5; ++node)
    logs.push_back(result.node_records(node));
  MeshAnalysis mesh = analyze_mesh(logs, 5);

  REQUIRE(mesh.links.size() == 20);
  for (const auto& link : mesh.links) {
    REQUIRE(link.oneway.size() > 100);
    double sum = 0;
    for (const auto& [wall, v] : link.oneway) sum += v;
    double measured = sum / static_cast<double>(link.oneway.size());
    double want = true_mean[{link.src, link.dst}];
    CHECK_MESSAGE(std::fabs(measured - want) / want < 0.05, "link ",
                  int(link.src), "->", int(link.dst), " measured ", measured,
                  " want ", want);

    std::size_t lost = 0;
    for (const auto& [wall, l] : link.messages) lost += l ? 1 : 0;
    CHECK(test::within_binomial_3sigma(lost, link.messages.size(), 0.005));
  }

  // Global loss has much tighter statistics.
  CHECK(test::within_binomial_3sigma(result.messages_lost,
                                     result.messages_sent, 0.005));
}

TEST_CASE("config validation rejects broken setups") {
  SimConfig cfg = two_node_constant(25, 25, 10);
  cfg.links.erase({1, 0});
  CHECK_THROWS(cfg.validate());

  SimConfig zero_ticks = two_node_constant(25, 25, 10);
  zero_ticks.ticks = 0;
  CHECK_THROWS(zero_ticks.validate());

  SimConfig bad_loss = two_node_constant(25, 25, 10);
  bad_loss.links[{0, 1}].loss_prob = 1.5;
  CHECK_THROWS(bad_loss.validate());
}

TEST_CASE("sim config parser handles sections, wildcards and overrides") {
  const char* text = R"(
# demo scenario
nodes 3
ticks 20
interval_ms 500
seed 77

[node 1]
offset_ms 5
drift_ppm 100

[link * *]
delay gamma shape=4.0 scale=10.0
loss 0.01

[link 0 1]
delay constant ms=25
loss 0
)";
  SimConfig cfg = SimConfig::from_text(text);
  CHECK(cfg.n_nodes == 3);
  CHECK(cfg.ticks == 20);
  CHECK(cfg.probe_interval_ms == 500);
  CHECK(cfg.seed == 77);
  CHECK(cfg.clocks[1].offset_ms == 5.0);
  CHECK(cfg.clocks[1].drift_ppm == 100.0);
  CHECK(cfg.clocks[0].offset_ms == 0.0);

  CHECK(cfg.link(0, 1).delay.constant_ms == 25.0);
  CHECK(cfg.link(0, 1).loss_prob == 0.0);
  CHECK(cfg.link(1, 0).delay.dist.has_value());
  CHECK(cfg.link(1, 0).delay.dist->shape == 4.0);
  CHECK(cfg.link(1, 0).loss_prob == 0.01);

  CHECK_THROWS(SimConfig::from_text("nodes 2\nticks 5\nbogus 1\n"));
  CHECK_THROWS(SimConfig::from_text("nodes 2\nticks 5\n"));  // no links
}

TEST_CASE("run_scenario keeps every record timestamp-ordered per node") {
  SimConfig cfg = two_node_constant(25, 40, 200);
  cfg.clocks[0].drift_ppm = 200;
  cfg.clocks[1].offset_ms = -3;
  SimResult result = run_scenario(cfg);
  for (std::size_t node = 0; node < 2; ++node) {
    auto records = result.node_records(node);
    for (std::size_t i = 1; i < records.size(); ++i)
      CHECK(records[i].timestamp_ms >= records[i - 1].timestamp_ms);
  }
}
