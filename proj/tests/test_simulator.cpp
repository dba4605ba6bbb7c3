#include "burstpace/simulator.hpp"
#include "burstpace/sweep.hpp"

#include "doctest.h"
#include "support.hpp"

#include <set>
#include <sstream>

using namespace burstpace;
using namespace burstpace::sim;
using namespace test_support;

namespace {

Options uniform(const Topology& t, std::size_t q) {
  Options o;
  for (const auto& r : t.routers()) o.queue_sizes[r] = q;
  return o;
}

// Five services on R0 all send to one client on R1 at the same instant.
const char* kFan = R"(config decentralized
router R0
router R1
link R0 R1 524288 0
client C0 R1
service S0 R0 128
service S1 R0 128
service S2 R0 128
service S3 R0 128
service S4 R0 128
)";

} // namespace

TEST_CASE("one message over one link") {
  auto t = fixture("colocated.topo");
  auto tr = run(t, {{0.0, "S0", "C0", MessageKind::UnicastReply, 128}}, uniform(t, 1));
  CHECK(tr.counters.delivered == 1);
  double hop = -1.0, done = -1.0;
  for (const auto& e : tr.events) {
    if (e.kind == EventKind::BeginTransmit && tr.node_names[e.location] == "R0") hop = e.time_s;
    if (e.kind == EventKind::Deliver) done = e.time_s;
  }
  CHECK(hop == kTsom);
  CHECK(done == 2 * kTsom);
}

TEST_CASE("five simultaneous arrivals at capacity two") {
  auto t = parse_topology_string(kFan);
  std::vector<Injection> w;
  for (int i = 0; i < 5; ++i) w.push_back({0.0, "S" + std::to_string(i), "C0", MessageKind::UnicastReply, 128});
  auto tr = run(t, w, uniform(t, 2));
  std::size_t started = 0, queued = 0;
  for (const auto& e : tr.events) {
    if (e.time_s != kTsom || tr.node_names[e.location] != "R0") continue;
    started += e.kind == EventKind::BeginTransmit;
    queued += e.kind == EventKind::Enqueue;
  }
  CHECK(started == 1);
  CHECK(queued == 2);
  CHECK(tr.counters.dropped == 2);
  CHECK(tr.counters.dropped_at.at("R0") == 2);
  CHECK(tr.counters.delivered == 3);
  CHECK(peak_occupancy(tr).at("R0") == 2);
  CHECK(tr.peak_occupancy.at("R0") == 2);
  // Ties break by location then message id: S0 goes first, S3 and S4 are lost.
  std::set<std::uint64_t> dropped;
  for (const auto& e : tr.events)
    if (e.kind == EventKind::Drop) dropped.insert(e.msg);
  CHECK(dropped == std::set<std::uint64_t>{3, 4});
}

TEST_CASE("empty workload") {
  auto t = fixture("two_routers.topo");
  auto tr = run(t, {}, uniform(t, 3));
  CHECK(tr.events.empty());
  CHECK(tr.counters.sent == 0);
  CHECK(tr.counters.delivered == 0);
  CHECK(tr.counters.dropped == 0);
  for (const auto& [r, p] : peak_occupancy(tr)) CHECK(p == 0);
}

TEST_CASE("single message never queues") {
  auto t = fixture("scenario1_decentralized.topo");
  auto tr = run(t, {{0.0, "S00", "C19", MessageKind::UnicastReply, 128}}, uniform(t, 25));
  CHECK(tr.counters.delivered == 1);
  for (const auto& [r, p] : peak_occupancy(tr)) CHECK(p <= 1);
}

TEST_CASE("multicast reaches every service once") {
  auto t = fixture("chain6_two_clients.topo");
  auto tr = run(t, {{0.0, "C0", "*", MessageKind::MulticastQuery, 128}}, uniform(t, 10));
  CHECK(tr.counters.delivered == 20);
  CHECK(tr.counters.sent + tr.counters.copies == 20);
}

TEST_CASE("malformed workloads") {
  auto t = fixture("two_routers.topo");
  auto o = uniform(t, 3);
  CHECK_THROWS_AS(run(t, {{-1.0, "S0", "C0", MessageKind::UnicastReply, 128}}, o), Error);
  CHECK_THROWS_AS(run(t, {{0.0, "nope", "C0", MessageKind::UnicastReply, 128}}, o), Error);
  CHECK_THROWS_AS(run(t, {{0.0, "S0", "R1", MessageKind::UnicastReply, 128}}, o), Error);
  CHECK_THROWS_AS(run(t, {{0.0, "S0", "S0", MessageKind::UnicastReply, 128}}, o), Error);
  CHECK_THROWS_AS(run(t, {{0.0, "R0", "C0", MessageKind::UnicastReply, 128}}, o), Error);
  CHECK_THROWS_AS(run(t, {{0.0, "S0", "C0", MessageKind::UnicastReply, 0}}, o), Error);
  Options partial;
  partial.queue_sizes["R0"] = 1;
  CHECK_THROWS_AS(Simulator(t, partial), Error);
}

TEST_CASE("finite client processing drops at the receiver") {
  auto t = parse_topology_string(kFan);
  Options o = uniform(t, 10);
  o.client_processing_rate = 1.0 / (4 * kTsom);
  o.client_queue_capacity = 1;
  std::vector<Injection> w;
  for (int i = 0; i < 5; ++i) w.push_back({0.0, "S" + std::to_string(i), "C0", MessageKind::UnicastReply, 128});
  auto tr = run(t, w, o);
  // Arrivals every TSoM against one service per 4 TSoM: the first is
  // served at once, the second waits, later ones overflow until space frees.
  CHECK(tr.counters.dropped > 0);
  CHECK(tr.counters.dropped_at.count("C0"));
  CHECK(tr.counters.sent == tr.counters.delivered + tr.counters.dropped);
}

TEST_CASE("trace text format") {
  auto t = fixture("colocated.topo");
  auto tr = run(t, {{0.0, "S0", "C0", MessageKind::UnicastReply, 128}}, uniform(t, 1));
  std::ostringstream ss;
  write_trace(tr, ss);
  CHECK(ss.str() == "0\tsend\t0\tS0\tC0\tS0\n"
                    "0\tbegin_transmit\t0\tS0\tC0\tS0>R0\n"
                    "0.001953125\tbegin_transmit\t0\tS0\tC0\tR0>C0\n"
                    "0.00390625\tdeliver\t0\tS0\tC0\tC0\n");
}

TEST_CASE("determinism, conservation and capacity on 100 random workloads") {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    CAPTURE(seed);
    auto w = random_workload(seed);
    REQUIRE(w.injections.size() >= 1);
    CHECK(simulator_violations(w).empty());
  }
}

TEST_CASE("drop monotonicity on 100 random workloads") {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    CAPTURE(seed);
    CHECK(monotonicity_violations(random_workload(seed), seed).empty());
  }
}
