#include "burstpace/queue_analysis.hpp"

#include "burstpace/topology.hpp"

#include <algorithm>
#include <cmath>

namespace burstpace::queue_analysis {

double receive_time(const Case& c) {
  if (!(c.incoming_rate > 0.0)) throw Error("incoming rate must be positive");
  if (c.processing_rate < 0.0) throw Error("processing rate must be non-negative");
  return static_cast<double>(c.sent_messages) / c.incoming_rate;
}

std::uint64_t processed_within(double rt, double pr) {
  if (rt < 0.0 || pr < 0.0) throw Error("receive time and processing rate must be non-negative");
  const double x = rt * pr;
  // Products such as 0.7 * 10 land a hair above the integer they denote.
  const double snapped = std::nearbyint(x);
  if (std::fabs(x - snapped) <= 1e-9 * std::max(1.0, x)) return static_cast<std::uint64_t>(snapped);
  return static_cast<std::uint64_t>(std::ceil(x));
}

bool will_drop(std::uint64_t received, double rt, double pr, std::uint64_t qsize) {
  return received > processed_within(rt, pr) + qsize;
}

std::uint64_t min_queue_size(std::uint64_t received, double rt, double pr) {
  const std::uint64_t processed = processed_within(rt, pr);
  return received > processed ? received - processed : 0;
}

std::optional<double> safe_receive_time(std::uint64_t received, std::uint64_t qsize, double pr) {
  if (pr < 0.0) throw Error("processing rate must be non-negative");
  if (received <= qsize) return 0.0;
  if (pr == 0.0) return std::nullopt;
  return static_cast<double>(received - qsize) / pr;
}

} // namespace burstpace::queue_analysis
