#include "burstpace/sweep.hpp"
#include "burstpace/topology.hpp"

#include "doctest.h"
#include "support.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <queue>
#include <random>
#include <set>

using namespace burstpace;
using namespace test_support;

namespace {

const char* kTwoRouters = R"(config decentralized
router R0
router R1
link R0 R1 524288 0
client C0 R0
service S0 R1 128
)";

// Router-hop distance by breadth-first search over the declared links.
std::size_t bfs_hops(const Topology& t, const std::string& from, const std::string& to) {
  std::map<std::string, std::vector<std::string>> adj;
  std::set<std::string> routers(t.routers().begin(), t.routers().end());
  for (const auto& l : t.links())
    if (routers.count(l.a) && routers.count(l.b)) {
      adj[l.a].push_back(l.b);
      adj[l.b].push_back(l.a);
    }
  std::map<std::string, std::size_t> dist{{from, 0}};
  std::queue<std::string> q;
  q.push(from);
  while (!q.empty()) {
    auto r = q.front();
    q.pop();
    for (const auto& n : adj[r])
      if (!dist.count(n)) {
        dist[n] = dist[r] + 1;
        q.push(n);
      }
  }
  return dist.at(to);
}

// Services per component after deleting `router`, by flood fill.
std::vector<std::size_t> component_services(const Topology& t, const std::string& router) {
  std::map<std::string, std::vector<std::string>> adj;
  std::set<std::string> routers(t.routers().begin(), t.routers().end());
  for (const auto& l : t.links())
    if (routers.count(l.a) && routers.count(l.b) && l.a != router && l.b != router) {
      adj[l.a].push_back(l.b);
      adj[l.b].push_back(l.a);
    }
  std::map<std::string, std::size_t> services;
  for (const auto& e : t.end_nodes())
    if (e.kind == EndKind::Service) ++services[e.router];
  std::set<std::string> seen{router};
  std::vector<std::size_t> out;
  for (const auto& start : t.routers()) {
    if (seen.count(start)) continue;
    std::size_t total = 0;
    std::vector<std::string> stack{start};
    seen.insert(start);
    while (!stack.empty()) {
      auto r = stack.back();
      stack.pop_back();
      total += services[r];
      for (const auto& n : adj[r])
        if (seen.insert(n).second) stack.push_back(n);
    }
    out.push_back(total);
  }
  return out;
}

} // namespace

TEST_CASE("minimal two-router file") {
  auto t = parse_topology_string(kTwoRouters);
  CHECK(t.router_count() == 2);
  CHECK(t.end_nodes().size() == 2);
  CHECK(t.total_clients() == 1);
  CHECK(t.total_services() == 1);
  // The access links were filled in from the first declared link.
  CHECK(t.links().size() == 3);
  CHECK(t.links()[t.link_between(t.index_of("R0"), t.index_of("C0"))].bandwidth_bps == 524288.0);
}

TEST_CASE("root with end nodes is rejected") {
  const char* text = R"(config centralized root R6
router R0
router R6
link R0 R6 524288 0
client C0 R6
service S0 R0 128
)";
  CHECK_THROWS_WITH_AS(parse_topology_string(text), doctest::Contains("root must have no end nodes"), Error);
}

TEST_CASE("scenario-1 text file") {
  auto t = load_topology(kFixtures + "/scenario1_text.topo");
  CHECK(t.router_count() == 4);
  CHECK(t.total_clients() == 16);
  CHECK(t.total_services() == 80);
  auto five = load_topology(kFixtures + "/scenario1_decentralized.topo");
  CHECK(five.total_clients() == 20);
  CHECK(five.total_services() == 100);
}

TEST_CASE("parse errors carry line numbers") {
  auto line_of = [](const std::string& text) {
    try {
      parse_topology_string(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return std::size_t{0};
  };
  CHECK(line_of("router R0\n") == 1);
  CHECK(line_of("config decentralized\nrouter R0\nrouter R0\n") == 3);
  CHECK(line_of("config decentralized\nrouter R0\nlink R0 R9 1 0\n") == 3);
  CHECK(line_of("config decentralized\nrouter R0\nlink R0 C0 1 0\nclient C0 R7\n") == 4);
  CHECK(line_of("config decentralized\nrouter R0\nlink R0 C0 zero 0\n") == 3);
  CHECK(line_of("config decentralized\nrouter R0\nlink R0 C0 1 -1\n") == 3);
  CHECK(line_of("config decentralized\n# fine\nbogus\n") == 3);
  CHECK(line_of("config decentralized\nrouter R0\nlink R0 S0 1 0\nservice S0 R0 12.5\n") == 4);
}

TEST_CASE("graph shape violations") {
  // Cycle in a decentralized graph.
  CHECK_THROWS_AS(parse_topology_string("config decentralized\nrouter A\nrouter B\nrouter C\n"
                                        "link A B 1 0\nlink B C 1 0\nlink C A 1 0\n"),
                  Error);
  // Disconnected routers.
  CHECK_THROWS_AS(parse_topology_string("config decentralized\nrouter A\nrouter B\n"), Error);
  // Leaf-to-leaf link in a star.
  CHECK_THROWS_AS(parse_topology_string("config centralized root R\nrouter A\nrouter B\nrouter R\n"
                                        "link A R 1 0\nlink B R 1 0\nlink A B 1 0\n"),
                  Error);
  // Duplicate link.
  CHECK_THROWS_AS(parse_topology_string("config decentralized\nrouter A\nrouter B\nlink A B 1 0\nlink B A 1 0\n"),
                  Error);
  // End node linked to a foreign router.
  CHECK_THROWS_AS(parse_topology_string("config decentralized\nrouter A\nrouter B\nlink A B 1 0\n"
                                        "link B C0 1 0\nclient C0 A\n"),
                  Error);
}

TEST_CASE("longest client/service path") {
  auto co = parse_topology_string("config decentralized\nrouter R0\nlink R0 C0 1 0\nlink R0 S0 1 0\n"
                                  "client C0 R0\nservice S0 R0 128\n");
  CHECK(longest_client_service_path(co).hops == 0);

  auto t = load_topology(kFixtures + "/scenario1_text.topo");
  auto p = longest_client_service_path(t);
  CHECK(p.hops == 3);
  CHECK(p.hops == bfs_hops(t, t.end_node(t.index_of(p.client)).router, t.end_node(t.index_of(p.service)).router));
  CHECK(p.client == "C00");
  CHECK(p.service == "S60");

  auto star = load_topology(kFixtures + "/star7_two_clients.topo");
  CHECK(longest_client_service_path(star).hops == 2);

  CHECK_THROWS_AS(longest_client_service_path(parse_topology_string(
                      "config decentralized\nrouter R0\nlink R0 S0 1 0\nservice S0 R0 128\n")),
                  Error);
}

TEST_CASE("hops agree with breadth-first search on random trees") {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    auto t = sweep::random_tree(seed);
    for (const auto& a : t.routers())
      for (const auto& b : t.routers()) REQUIRE(t.hops(t.index_of(a), t.index_of(b)) == bfs_hops(t, a, b));
  }
}

TEST_CASE("split parts") {
  auto t = load_topology(kFixtures + "/scenario1_text.topo");
  auto end = split_parts(t, "R0");
  CHECK(end.left_services == 60);
  CHECK(end.right_services == 0);
  auto mid = split_parts(t, "R1");
  CHECK(mid.left_services == 40);
  CHECK(mid.right_services == 20);
  CHECK(t.name_of(*mid.left_neighbor) == "R2");

  auto two = make_chain(2, 4, 20, 128, 524288);
  auto s = split_parts(two, "R0");
  CHECK(s.left_services == 20);
  CHECK(s.right_services == 0);

  CHECK_THROWS_AS(split_parts(load_topology(kFixtures + "/star7_two_clients.topo"), "R6"), Error);
  CHECK_THROWS_AS(split_parts(t, "nope"), Error);
}

TEST_CASE("split parts match a flood-fill oracle and sum to the total") {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    auto t = sweep::random_tree(seed);
    for (std::size_t r = 0; r < t.router_count(); ++r) {
      auto parts = component_services(t, t.routers()[r]);
      std::sort(parts.rbegin(), parts.rend());
      auto s = split_parts(t, r);
      const std::size_t rest = parts.empty() ? 0 : std::accumulate(parts.begin() + 1, parts.end(), std::size_t{0});
      REQUIRE(s.left_services == (parts.empty() ? 0 : parts[0]));
      REQUIRE(s.right_services == rest);
      REQUIRE(s.left_services + s.right_services + t.services_at(r) == t.total_services());
    }
  }
}

TEST_CASE("serialization round-trips") {
  for (const char* f : {"scenario1_text.topo", "scenario1_decentralized.topo", "scenario1_centralized.topo",
                        "chain6_two_clients.topo", "star7_two_clients.topo", "two_routers.topo", "colocated.topo"}) {
    auto t = load_topology(kFixtures + "/" + f);
    CHECK(parse_topology_string(serialize_topology(t)) == t);
  }
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    auto t = sweep::random_tree(seed);
    REQUIRE(parse_topology_string(serialize_topology(t)) == t);
  }
  auto odd = parse_topology_string("config decentralized\nrouter A\nrouter B\nlink A B 1000.5 0.0001\n"
                                   "link A C 77777.125 0.25\nclient C A\nservice S B 300\n");
  CHECK(parse_topology_string(serialize_topology(odd)) == odd);
}

TEST_CASE("longest path length is invariant under router relabeling") {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    auto t = sweep::random_tree(seed);
    auto r = relabel(t, seed * 7);
    REQUIRE(longest_client_service_path(t).hops == longest_client_service_path(r).hops);
  }
}
