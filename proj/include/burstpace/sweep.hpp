#ifndef BURSTPACE_SWEEP_HPP
#define BURSTPACE_SWEEP_HPP

#include "burstpace/planner.hpp"
#include "burstpace/protocols.hpp"
#include "burstpace/topology.hpp"

#include <cstdint>
#include <optional>
#include <vector>

// Fan-out of independent simulation runs. Each parallel kernel has a
// serial twin with identical results, kept for tests and the benchmark.
namespace burstpace::sweep {

/// Drops of a paced run at each interval.
std::vector<std::uint64_t> drops_over_intervals(const Topology& t, const QueueSizes& queues,
                                                const std::vector<double>& intervals, std::uint32_t bytes,
                                                const protocols::RunOptions& options = {});
std::vector<std::uint64_t> drops_over_intervals_serial(const Topology& t, const QueueSizes& queues,
                                                       const std::vector<double>& intervals, std::uint32_t bytes,
                                                       const protocols::RunOptions& options = {});

/// First zero-drop point of the oracle grid, scanned upwards in parallel
/// blocks. Agrees with protocols::min_zero_drop_interval whenever drops
/// are monotone in the interval.
std::optional<double> min_zero_drop_interval_scan(const Topology& t, const QueueSizes& queues,
                                                  const MessageParams& p,
                                                  const protocols::RunOptions& options = {});

/// Random decentralized tree: 1..max_routers routers, each attached to a
/// random earlier router, with 0..max_end_nodes clients or services each.
/// Always holds at least one client and one service.
Topology random_tree(std::uint64_t seed, std::size_t max_routers = 8, std::size_t max_end_nodes = 6);

struct TreeCheck {
  std::uint64_t seed = 0;
  double best_interval_s = 0.0;
  double tsom_s = 0.0;
  std::optional<double> oracle_s;
  std::uint64_t planned_drops = 0; // paced run at the planned interval
  std::uint64_t tighter_drops = 0; // paced run one TSoM below it
};

/// Plans, simulates and runs the oracle on random_tree(seed) for each seed.
std::vector<TreeCheck> check_random_trees(const std::vector<std::uint64_t>& seeds);
std::vector<TreeCheck> check_random_trees_serial(const std::vector<std::uint64_t>& seeds);

} // namespace burstpace::sweep

#endif // BURSTPACE_SWEEP_HPP
