#ifndef BURSTPACE_SIMULATOR_HPP
#define BURSTPACE_SIMULATOR_HPP

#include "burstpace/planner.hpp"
#include "burstpace/topology.hpp"

#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <queue>
#include <string>
#include <vector>

namespace burstpace::sim {

enum class MessageKind { MulticastQuery, UnicastReply, BackTraffic };

/// Destination meaning "every service reachable from the sender".
inline constexpr std::size_t kAllServices = std::numeric_limits<std::size_t>::max();

struct Message {
  std::uint64_t id = 0;
  std::size_t src = 0;
  std::size_t dst = 0; // node index or kAllServices
  MessageKind kind = MessageKind::UnicastReply;
  std::uint32_t size_bytes = 0;
  double created_s = 0.0;
  /// Protocol payload: services a query asks not to answer (indexed by node).
  std::shared_ptr<const std::vector<bool>> listed;
};

enum class EventKind { Send, Enqueue, BeginTransmit, Deliver, Drop };

const char* to_string(EventKind k);

struct SimEvent {
  double time_s = 0.0;
  EventKind kind = EventKind::Send;
  std::uint64_t msg = 0;
  std::size_t src = 0;
  std::size_t dst = 0;
  std::size_t location = 0;
  /// Far end of the channel for queue and transmit events.
  std::optional<std::size_t> peer;
  /// BeginTransmit of a message that had been waiting in a queue.
  bool from_queue = false;
};

struct Counters {
  std::uint64_t sent = 0;   // injected messages
  std::uint64_t copies = 0; // extra copies made by multicast replication
  std::uint64_t delivered = 0;
  std::uint64_t dropped = 0;
  std::map<std::string, std::uint64_t> dropped_at; // by queue owner
};

struct SimTrace {
  std::vector<SimEvent> events;
  Counters counters;
  /// Highest simultaneous occupancy of each router's sending queue.
  std::map<std::string, std::size_t> peak_occupancy;
  std::vector<std::string> node_names;
};

struct Options {
  /// Capacity of each router's sending queue, shared by its links to other
  /// routers. Must cover every router.
  QueueSizes queue_sizes;
  /// Capacity of each router-to-end-node delivery queue; unbounded if empty.
  std::optional<std::size_t> edge_queue_capacity;
  /// Finite client processing: clients serve one message per 1/rate
  /// seconds and buffer at most client_queue_capacity waiting messages.
  std::optional<double> client_processing_rate;
  std::size_t client_queue_capacity = std::numeric_limits<std::size_t>::max();
  bool record_events = true;
};

/// Single-threaded event loop over an immutable topology.
///
/// Each link direction serialises one message at a time (size*8/bandwidth)
/// and then adds its propagation delay. A message that finds its link busy
/// waits in a drop-tail FIFO; the message being transmitted holds no slot.
/// Simultaneous events run in the order: transmit completions, arrivals,
/// injections, timers; then by location index, then by message id.
class Simulator {
public:
  /// Called with the receiving end node and the delivery time.
  using DeliveryHandler = std::function<void(Simulator&, const Message&, std::size_t, double)>;
  using Timer = std::function<void(Simulator&)>;

  Simulator(const Topology& topology, Options options);

  /// Schedules a message injected at end node `src` at time `at`.
  std::uint64_t send(double at, std::size_t src, std::size_t dst, MessageKind kind, std::uint32_t bytes,
                     std::shared_ptr<const std::vector<bool>> listed = nullptr);
  void schedule(double at, Timer fn);
  void on_deliver(DeliveryHandler fn) { on_deliver_ = std::move(fn); }

  /// Processes events until none remain.
  void run();

  double now() const noexcept { return now_; }
  const Topology& topology() const noexcept { return topo_; }
  const SimTrace& trace() const noexcept { return trace_; }
  SimTrace take_trace() { return std::move(trace_); }

private:
  enum class Step { TxComplete = 0, ProcComplete = 0, Arrive = 1, Inject = 2, Timer = 3 };
  struct Pending {
    double time;
    int order;
    std::size_t location;
    std::uint64_t msg;
    std::uint64_t seq;
    int type; // 0 tx complete, 1 proc complete, 2 arrive, 3 inject, 4 timer
    std::size_t where; // channel, client node or timer slot
    bool operator>(const Pending& o) const;
  };
  struct Pool {
    std::size_t capacity = std::numeric_limits<std::size_t>::max();
    std::size_t occupancy = 0;
    std::size_t peak = 0;
    std::string owner;
  };
  struct Channel {
    std::size_t from = 0, to = 0;
    double bandwidth_bps = 0.0, delay_s = 0.0;
    std::deque<std::uint64_t> waiting;
    bool busy = false;
    std::optional<std::size_t> pool;
  };
  struct ClientInbox {
    std::deque<std::uint64_t> waiting;
    bool busy = false;
    Pool pool;
  };

  void push(double time, Step order, std::size_t location, std::uint64_t msg, int type, std::size_t where);
  void record(EventKind kind, const Message& m, std::size_t location, std::optional<std::size_t> peer = {},
              bool from_queue = false);
  std::size_t channel_index(std::size_t from, std::size_t to) const;
  void offer(std::size_t channel, std::uint64_t msg);
  void begin_transmit(std::size_t channel, std::uint64_t msg, bool from_queue);
  void drop(const Message& m, std::size_t location, std::optional<std::size_t> peer, const std::string& owner);
  void arrive(std::size_t channel, std::uint64_t msg);
  void deliver(std::size_t node, std::uint64_t msg);
  std::uint64_t copy_of(std::uint64_t msg);

  const Topology& topo_;
  Options opts_;
  double now_ = 0.0;
  std::uint64_t seq_ = 0;
  std::priority_queue<Pending, std::vector<Pending>, std::greater<>> agenda_;
  std::vector<Message> messages_;
  std::vector<Channel> channels_;
  std::vector<Pool> pools_;
  std::map<std::size_t, ClientInbox> inboxes_;
  std::vector<Timer> timers_;
  DeliveryHandler on_deliver_;
  SimTrace trace_;
};

/// Static workload entry for run().
struct Injection {
  double time_s = 0.0;
  std::string src;
  std::string dst; // node id, or "*" for every service
  MessageKind kind = MessageKind::UnicastReply;
  std::uint32_t size_bytes = 0;
};

/// Runs a fixed workload to quiescence.
SimTrace run(const Topology& t, const std::vector<Injection>& workload, const Options& options);

/// Peak sending-queue occupancy per router, recomputed from the events.
std::map<std::string, std::size_t> peak_occupancy(const SimTrace& trace);

/// One line per event: time, kind, msg_id, src, dst, location (tab separated).
void write_trace(const SimTrace& trace, std::ostream& out);
/// key=value counter summary.
void write_counters(const SimTrace& trace, std::ostream& out);

} // namespace burstpace::sim

#endif // BURSTPACE_SIMULATOR_HPP
