#ifndef BURSTPACE_TEST_SUPPORT_HPP
#define BURSTPACE_TEST_SUPPORT_HPP

#include "burstpace/simulator.hpp"
#include "burstpace/sweep.hpp"
#include "burstpace/topology.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>
#include <string>

namespace test_support {

inline const std::string kFixtures = BURSTPACE_FIXTURES;
inline constexpr double kTsom = 0.001953125;

inline burstpace::Topology fixture(const std::string& name) { return burstpace::load_topology(kFixtures + "/" + name); }

/// Same network with router ids replaced by a random permutation of X0..Xn.
inline burstpace::Topology relabel(const burstpace::Topology& t, std::uint64_t seed) {
  using namespace burstpace;
  std::vector<std::string> names;
  for (std::size_t i = 0; i < t.router_count(); ++i) names.push_back("X" + std::to_string(i));
  std::mt19937_64 rng(seed);
  std::shuffle(names.begin(), names.end(), rng);
  std::map<std::string, std::string> m;
  for (std::size_t i = 0; i < t.router_count(); ++i) m[t.routers()[i]] = names[i];
  auto rn = [&](const std::string& id) { return m.count(id) ? m[id] : id; };
  std::vector<std::string> routers;
  for (const auto& r : t.routers()) routers.push_back(rn(r));
  std::vector<EndNode> ends = t.end_nodes();
  for (auto& e : ends) e.router = rn(e.router);
  std::vector<Link> links = t.links();
  for (auto& l : links) {
    l.a = rn(l.a);
    l.b = rn(l.b);
  }
  Configuration c = t.configuration();
  if (c.centralized) c.root = rn(c.root);
  return Topology(c, routers, ends, links);
}

// Slot-by-slot receiver: the burst arrives while the server gets one
// processing opportunity for every whole or partial message time in
// rt*pr; arrivals beyond that wait in the queue or are lost.
inline std::uint64_t trace_drops(std::uint64_t received, double rt, double pr, std::uint64_t qsize) {
  std::uint64_t opportunities = 0;
  for (double j = 0.0; j < rt * pr; j += 1.0) ++opportunities;
  std::uint64_t served = 0, waiting = 0, lost = 0;
  for (std::uint64_t i = 0; i < received; ++i) {
    if (served < opportunities)
      ++served;
    else if (waiting < qsize)
      ++waiting;
    else
      ++lost;
  }
  return lost;
}

struct RandomCase {
  std::uint64_t received, qsize;
  double rt, pr;
};

inline std::vector<RandomCase> random_cases(std::size_t n) {
  std::mt19937_64 rng(20240601);
  std::uniform_int_distribution<int> recv(0, 50), quarter(0, 40), rate(0, 20), q(0, 30);
  std::vector<RandomCase> out;
  for (std::size_t i = 0; i < n; ++i)
    out.push_back({static_cast<std::uint64_t>(recv(rng)), static_cast<std::uint64_t>(q(rng)), quarter(rng) / 4.0,
                   static_cast<double>(rate(rng))});
  return out;
}

struct Workload {
  burstpace::Topology topo;
  std::vector<burstpace::sim::Injection> injections;
  burstpace::sim::Options options;
};

/// Random tree with up to 60 unicast or multicast injections and small
/// random queues.
inline Workload random_workload(std::uint64_t seed) {
  using namespace burstpace;
  using namespace burstpace::sim;
  Workload w{sweep::random_tree(seed), {}, {}};
  std::mt19937_64 rng(seed * 31 + 7);
  auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
  const auto& ends = w.topo.end_nodes();
  const std::size_t count = 1 + pick(60);
  for (std::size_t i = 0; i < count; ++i) {
    const auto& src = ends[pick(ends.size())];
    Injection in;
    in.time_s = static_cast<double>(pick(80)) * kTsom / 4.0;
    in.src = src.id;
    in.size_bytes = 128;
    if (src.kind == EndKind::Client && pick(3) == 0) {
      in.dst = "*";
      in.kind = MessageKind::MulticastQuery;
    } else {
      std::size_t d = pick(ends.size());
      if (ends[d].id == src.id) d = (d + 1) % ends.size();
      if (ends[d].id == src.id) continue;
      in.dst = ends[d].id;
      in.kind = MessageKind::UnicastReply;
    }
    w.injections.push_back(in);
  }
  for (const auto& r : w.topo.routers()) w.options.queue_sizes[r] = 1 + pick(4);
  return w;
}

inline std::string dump(const burstpace::sim::SimTrace& tr) {
  std::ostringstream ss;
  burstpace::sim::write_trace(tr, ss);
  burstpace::sim::write_counters(tr, ss);
  return ss.str();
}

/// Determinism, conservation, capacity and work-conservation checks for
/// one workload; returns a description of each violated property.
inline std::vector<std::string> simulator_violations(const Workload& w) {
  using namespace burstpace::sim;
  std::vector<std::string> bad;
  auto a = run(w.topo, w.injections, w.options);
  auto b = run(w.topo, w.injections, w.options);
  if (dump(a) != dump(b)) bad.push_back("traces differ between identical runs");

  if (a.counters.sent + a.counters.copies != a.counters.delivered + a.counters.dropped)
    bad.push_back("sent + copies != delivered + dropped");
  std::uint64_t by_place = 0;
  for (const auto& [r, n] : a.counters.dropped_at) by_place += n;
  if (by_place != a.counters.dropped) bad.push_back("per-queue drops do not add up");

  // Replay the router queues: never above capacity, and full at every drop.
  const std::size_t routers = w.topo.router_count();
  std::map<std::size_t, std::size_t> occ;
  for (const auto& e : a.events) {
    if (!e.peer || e.location >= routers || *e.peer >= routers) continue;
    const std::size_t cap = w.options.queue_sizes.at(a.node_names[e.location]);
    if (e.kind == EventKind::Enqueue && ++occ[e.location] > cap) bad.push_back("occupancy above capacity");
    if (e.kind == EventKind::BeginTransmit && e.from_queue) --occ[e.location];
    if (e.kind == EventKind::Drop && occ[e.location] != cap) bad.push_back("drop from a queue with room");
  }
  if (peak_occupancy(a) != a.peak_occupancy) bad.push_back("peak occupancy replay disagrees");

  // Work conservation: a queued message starts the instant its link frees.
  std::map<std::pair<std::size_t, std::size_t>, double> last_start;
  double last_time = 0.0;
  for (const auto& e : a.events) {
    if (e.time_s < last_time) bad.push_back("trace not time-ordered");
    last_time = e.time_s;
    if (e.kind != EventKind::BeginTransmit) continue;
    auto key = std::make_pair(e.location, *e.peer);
    if (e.from_queue && std::abs(e.time_s - (last_start.at(key) + kTsom)) > 1e-12)
      bad.push_back("link idle while its queue was non-empty");
    last_start[key] = e.time_s;
  }
  return bad;
}

/// Drops never rise when every queue grows or when injections spread out.
inline std::vector<std::string> monotonicity_violations(const Workload& w, std::uint64_t seed) {
  using namespace burstpace::sim;
  std::vector<std::string> bad;
  const auto base = run(w.topo, w.injections, w.options).counters.dropped;
  auto bigger = w.options;
  for (auto& [r, q] : bigger.queue_sizes) q += 1 + seed % 3;
  if (run(w.topo, w.injections, bigger).counters.dropped > base) bad.push_back("larger queues dropped more");
  auto slower = w.injections;
  for (auto& in : slower) in.time_s *= 2.0;
  if (run(w.topo, slower, w.options).counters.dropped > base) bad.push_back("stretched injections dropped more");
  return bad;
}

} // namespace test_support

#endif // BURSTPACE_TEST_SUPPORT_HPP
