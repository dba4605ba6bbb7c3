#ifndef BURSTPACE_TOPOLOGY_HPP
#define BURSTPACE_TOPOLOGY_HPP

#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace burstpace {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed topology text. `line()` is 1-based, 0 when the problem is
/// not attached to a single line (e.g. a graph-shape violation).
class ParseError : public Error {
public:
  ParseError(std::size_t line, const std::string& what);
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

enum class EndKind { Client, Service };

struct EndNode {
  std::string id;
  EndKind kind = EndKind::Client;
  std::string router;
  std::uint32_t message_bytes = 0; // services only

  bool operator==(const EndNode&) const = default;
};

struct Link {
  std::string a;
  std::string b;
  double bandwidth_bps = 0.0;
  double delay_s = 0.0;

  bool operator==(const Link&) const = default;
};

struct Configuration {
  bool centralized = false;
  std::string root; // set iff centralized

  bool operator==(const Configuration&) const = default;
};

/// Validated, immutable network model.
///
/// Routers are indexed 0..router_count()-1 in lexicographic id order; end
/// nodes follow in lexicographic id order. All graph queries are
/// precomputed at construction so concurrent readers never mutate state.
class Topology {
public:
  Topology(Configuration config, std::vector<std::string> routers,
           std::vector<EndNode> end_nodes, std::vector<Link> links);

  const Configuration& configuration() const noexcept { return config_; }
  bool centralized() const noexcept { return config_.centralized; }
  const std::vector<std::string>& routers() const noexcept { return routers_; }
  const std::vector<EndNode>& end_nodes() const noexcept { return end_nodes_; }
  /// Every link, including end-node access links filled in from defaults.
  const std::vector<Link>& links() const noexcept { return links_; }

  std::size_t router_count() const noexcept { return routers_.size(); }
  std::size_t node_count() const noexcept { return routers_.size() + end_nodes_.size(); }

  /// Node index (routers first, then end nodes); nullopt for unknown ids.
  std::optional<std::size_t> find(const std::string& id) const;
  std::size_t index_of(const std::string& id) const;
  const std::string& name_of(std::size_t node) const;
  bool is_router(std::size_t node) const noexcept { return node < routers_.size(); }
  const EndNode& end_node(std::size_t node) const { return end_nodes_.at(node - routers_.size()); }
  /// Router an end node hangs off; identity for routers.
  std::size_t attachment(std::size_t node) const;

  std::size_t clients_at(std::size_t router) const { return clients_at_.at(router); }
  std::size_t services_at(std::size_t router) const { return services_at_.at(router); }
  std::size_t total_clients() const noexcept { return total_clients_; }
  std::size_t total_services() const noexcept { return total_services_; }
  /// End nodes attached to a router, sorted by id.
  const std::vector<std::size_t>& attached(std::size_t router) const { return attached_.at(router); }

  /// Router neighbours of a router, sorted by index.
  const std::vector<std::size_t>& router_neighbors(std::size_t router) const {
    return router_adj_.at(router);
  }
  /// Router-hop distance between two routers.
  std::size_t hops(std::size_t r1, std::size_t r2) const { return hops_.at(r1 * routers_.size() + r2); }
  /// Next node on the unique path from `from` towards `to` (both node indices).
  std::size_t next_hop(std::size_t from, std::size_t to) const;
  /// Index into links() for the link joining two adjacent nodes.
  std::size_t link_between(std::size_t a, std::size_t b) const;
  /// Whether the branch entered from `router` through neighbour `next`
  /// contains at least one service.
  bool branch_has_services(std::size_t router, std::size_t next) const;
  /// Sorted indices of every node adjacent to `node` (routers and end nodes).
  const std::vector<std::size_t>& neighbors(std::size_t node) const { return adj_.at(node); }

  bool operator==(const Topology& other) const;

private:
  void validate_and_index();

  Configuration config_;
  std::vector<std::string> routers_;
  std::vector<EndNode> end_nodes_;
  std::vector<Link> links_;

  std::vector<std::vector<std::size_t>> adj_;
  std::vector<std::vector<std::size_t>> router_adj_;
  std::vector<std::vector<std::size_t>> attached_;
  std::vector<std::size_t> clients_at_;
  std::vector<std::size_t> services_at_;
  std::vector<std::size_t> hops_;
  std::vector<std::size_t> next_router_; // [from_router * R + to_router]
  std::vector<std::size_t> link_index_;  // [a * N + b], npos when absent
  std::vector<char> branch_services_;    // [router * N + neighbour]
  std::size_t total_clients_ = 0;
  std::size_t total_services_ = 0;
};

/// Parses the line-based topology format. Access links that are not
/// declared explicitly inherit the bandwidth and delay of the first
/// declared link.
Topology parse_topology(std::istream& in);
Topology parse_topology_string(const std::string& text);
Topology load_topology(const std::string& path);

/// Writes every declaration explicitly; parse(serialize(t)) == t.
void serialize_topology(const Topology& t, std::ostream& out);
std::string serialize_topology(const Topology& t);

struct ClientServicePath {
  std::string client;
  std::string service;
  std::size_t hops = 0;
};

/// Client/service pair with the most router hops between their routers.
/// Ties go to the lexicographically smallest (client, service) pair.
ClientServicePath longest_client_service_path(const Topology& t);

struct SplitParts {
  std::size_t left_services = 0;  // largest component
  std::size_t right_services = 0; // every other component combined
  /// Neighbour of the split router inside the largest component, if any.
  std::optional<std::size_t> left_neighbor;
};

/// Service counts on either side of `router` in a decentralized tree.
/// With more than two components the largest becomes "left" and the rest
/// are summed into "right". Ties pick the component holding the
/// lexicographically smallest router id.
SplitParts split_parts(const Topology& t, const std::string& router);
SplitParts split_parts(const Topology& t, std::size_t router);

} // namespace burstpace

#endif // BURSTPACE_TOPOLOGY_HPP
