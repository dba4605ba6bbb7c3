#ifndef BURSTPACE_PROTOCOLS_HPP
#define BURSTPACE_PROTOCOLS_HPP

#include "burstpace/planner.hpp"
#include "burstpace/simulator.hpp"
#include "burstpace/topology.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace burstpace::protocols {

struct BackTrafficFlow {
  std::string service;
  std::string client;
  std::size_t count = 0;
  double period_s = 0.0;
};

/// Parses "SERVICE:CLIENT:COUNT:PERIOD".
BackTrafficFlow parse_back_traffic(const std::string& spec);

struct PacedDiscoveryConfig {
  double interval_s = 0.0;
  std::uint32_t reply_bytes = 128;
  std::uint32_t query_bytes = 128;
  std::vector<BackTrafficFlow> back_traffic;
  /// Back-traffic starts this long after the first reply burst.
  double back_traffic_offset_s = 1e-6;
};

struct MaxLimitDiscoveryConfig {
  double timeout_s = 0.0;
  std::uint32_t reply_bytes = 128;
  std::uint32_t query_bytes = 128;
  std::size_t round_cap = 64;
};

/// Extra simulator knobs shared by both protocols.
struct RunOptions {
  std::optional<std::size_t> edge_queue_capacity;
  sim::SimTrace* trace = nullptr; // filled when non-null
};

struct ScenarioMetrics {
  std::size_t multicast_rounds = 0;
  std::uint64_t dropped = 0;
  std::uint64_t replies_sent = 0;
  std::uint64_t duplicates_received = 0;
  /// First query to the last reply delivery (paced) or the last new
  /// discovery (maximum limit).
  double discovery_time_s = 0.0;
  /// Time until every query copy was delivered or dropped (paced only).
  double multicast_time_s = 0.0;
  /// Cumulative share of (client, service) pairs known after each round.
  std::vector<double> per_round_discovered_pct;
  std::uint64_t back_traffic_sent = 0;
  std::uint64_t back_traffic_delivered = 0;
  std::map<std::string, std::size_t> peak_occupancy;
};

/// Every client multicasts one query at t=0. Once the query traffic has
/// drained, all services reply to the first client (ascending id) at the
/// same instant, wait `interval_s`, reply to the second client, and so on.
ScenarioMetrics run_paced(const Topology& t, const QueueSizes& queues, const PacedDiscoveryConfig& cfg,
                          const RunOptions& options = {});
ScenarioMetrics run_paced(const Topology& t, const Plan& plan, const PacedDiscoveryConfig& cfg,
                          const RunOptions& options = {});

/// Clients re-multicast every `timeout_s`, listing the services they have
/// already heard from; a client stops after a round brings nothing new.
/// Throws when a client would exceed `round_cap` rounds.
ScenarioMetrics run_max_limit(const Topology& t, const MaxLimitDiscoveryConfig& cfg, const QueueSizes& queues,
                              const RunOptions& options = {});

/// Smallest interval on a grid of TSoM/4 at which paced discovery drops
/// nothing, by exponential bracketing and bisection. nullopt when even
/// fully separated bursts drop messages.
std::optional<double> min_zero_drop_interval(const Topology& t, const QueueSizes& queues, const MessageParams& p,
                                             const RunOptions& options = {});

/// Grid step and the largest interval the oracle will try.
struct OracleGrid {
  double step_s = 0.0;
  std::size_t max_steps = 0;
};
OracleGrid oracle_grid(const Topology& t, const MessageParams& p);

/// Drops of a paced run (no back-traffic) at the given interval.
std::uint64_t paced_drops(const Topology& t, const QueueSizes& queues, double interval_s, std::uint32_t bytes,
                          const RunOptions& options = {});

void write_metrics(const ScenarioMetrics& m, std::ostream& out, std::optional<int> decimals = std::nullopt);
std::string metrics_csv_header();
std::string metrics_csv_row(const std::string& label, const ScenarioMetrics& m,
                            std::optional<int> decimals = std::nullopt);

struct ComparisonColumn {
  std::string label;
  ScenarioMetrics metrics;
};

/// Paced discovery at the planned interval against the maximum-limit
/// method at each timeout.
std::vector<ComparisonColumn> compare(const Topology& t, const Plan& plan, const std::vector<double>& timeouts,
                                      std::uint32_t message_bytes, const RunOptions& options = {});
void write_comparison(const std::vector<ComparisonColumn>& cols, std::ostream& out,
                      std::optional<int> decimals = std::nullopt);

} // namespace burstpace::protocols

#endif // BURSTPACE_PROTOCOLS_HPP
