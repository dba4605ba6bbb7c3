#ifndef BURSTPACE_QUEUE_ANALYSIS_HPP
#define BURSTPACE_QUEUE_ANALYSIS_HPP

#include <cstdint>
#include <optional>

namespace burstpace::queue_analysis {

/// Receiver-side burst model: a burst of `sent_messages` arrives at
/// `incoming_rate` msg/s, is drained at `processing_rate` msg/s and the
/// excess waits in a drop-tail queue of `queue_size` slots.
struct Case {
  std::uint64_t sent_messages = 0;
  double incoming_rate = 0.0;
  double processing_rate = 0.0;
  std::uint64_t queue_size = 0;
};

/// Time needed to receive the whole burst. Throws on incoming_rate <= 0.
double receive_time(const Case& c);

/// Messages whose processing starts within `rt` seconds: rt*pr rounded up,
/// a message already at the head counts as processed.
std::uint64_t processed_within(double rt, double pr);

/// True when a burst of `received` messages overflows the queue.
bool will_drop(std::uint64_t received, double rt, double pr, std::uint64_t qsize);

/// Smallest queue that absorbs the burst (0 when processing keeps up).
std::uint64_t min_queue_size(std::uint64_t received, double rt, double pr);

/// Shortest receive time the queue survives; nullopt when no finite time
/// works (pr == 0 with received > qsize).
std::optional<double> safe_receive_time(std::uint64_t received, std::uint64_t qsize, double pr);

} // namespace burstpace::queue_analysis

#endif // BURSTPACE_QUEUE_ANALYSIS_HPP
