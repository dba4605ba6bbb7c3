#ifndef BURSTPACE_PLANNER_HPP
#define BURSTPACE_PLANNER_HPP

#include "burstpace/topology.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace burstpace {

/// Size of one message and the bandwidth it crosses. With `fixed_step_s`
/// set, message times are rounded up to a multiple of the step.
struct MessageParams {
  std::uint32_t message_bytes = 0;
  double bandwidth_bps = 0.0;
  std::optional<double> fixed_step_s;
};

/// Time to send one message (TSoM).
double message_time(const MessageParams& p);

/// Mean service message size and mean link bandwidth of a topology.
MessageParams default_message_params(const Topology& t, std::optional<double> fixed_step_s = std::nullopt);

using QueueSizes = std::map<std::string, std::size_t>;

/// Services only: S + 2; no end nodes: 2; otherwise C + S + 1.
QueueSizes queue_sizes_decentralized(const Topology& t);
/// Root: max(1, n - L - (L - 1)) with L the largest per-router service
/// count; every other router: its clients plus services.
QueueSizes queue_sizes_centralized(const Topology& t);
QueueSizes queue_sizes(const Topology& t);

std::vector<std::string> candidate_routers_decentralized(const Topology& t);
std::vector<std::string> candidate_routers_centralized(const Topology& t);

/// Spare slots in the larger-side neighbour's queue, shared between the
/// clients of `chosen`, floored. When both sides tie the smaller value is
/// returned.
std::size_t overlap_space(const Topology& t, const std::string& chosen);

/// Idle message slots at `chosen` while one burst fills the pipeline: every
/// service emits one message at slot 0 towards `chosen`, and the result
/// counts slots 1..last in which nothing arrives from a neighbouring router.
/// The count is in message-time units, so it does not depend on the
/// message size or bandwidth.
std::size_t gap_slots(const Topology& t, const std::string& chosen);

struct CandidateEvaluation {
  std::string router;
  std::size_t large = 0;          // messages that must funnel through the router
  std::size_t gaps = 0;
  std::size_t overlap_space = 0;  // decentralized OS
  std::size_t local_services = 0; // centralized RLargeC_S
  double interval_s = 0.0;
};

struct Plan {
  bool centralized = false;
  QueueSizes queue_sizes;
  std::vector<std::string> candidates;
  std::string chosen;
  std::size_t large = 0;
  std::size_t overlap_space = 0;
  std::size_t local_services = 0;
  std::size_t gap_slots = 0;
  double tsom_s = 0.0;
  double max_message_time_s = 0.0; // T(x_j)
  double best_interval_s = 0.0;
  /// Time for the busiest service router's burst to reach the root
  /// (centralized only, informational).
  std::optional<double> root_fill_time_s;
  std::vector<CandidateEvaluation> evaluations;

  /// best_interval_s expressed in TSoM units.
  double interval_in_tsom() const { return tsom_s > 0.0 ? best_interval_s / tsom_s : 0.0; }
};

Plan best_interval_decentralized(const Topology& t, const MessageParams& p);
Plan best_interval_centralized(const Topology& t, const MessageParams& p);
/// Dispatches on the declared configuration.
Plan plan(const Topology& t, const MessageParams& p);

/// Chain of `routers` routers R0..R{n-1}, each with the given number of
/// clients and services, every link at `bandwidth_bps` with no delay.
Topology make_chain(std::size_t routers, std::size_t clients_per_router, std::size_t services_per_router,
                    std::uint32_t message_bytes, double bandwidth_bps);

struct IntervalCell {
  std::size_t routers = 0;
  std::size_t per_router = 0;   // clients and services per router
  std::size_t network_size = 0; // 2 * per_router * routers
  double interval_tsom = 0.0;
};

/// Best interval in TSoM units for chains of every (routers, per_router)
/// combination, row-major by per_router then routers.
std::vector<IntervalCell> interval_table(const std::vector<std::size_t>& router_counts,
                                         const std::vector<std::size_t>& per_router, const MessageParams& p);

} // namespace burstpace

#endif // BURSTPACE_PLANNER_HPP
