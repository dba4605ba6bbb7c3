#include "burstpace/simulator.hpp"

#include "burstpace/format.hpp"

#include <cmath>
#include <tuple>

namespace burstpace::sim {

namespace {

enum Type { kTxComplete = 0, kProcComplete = 1, kArrive = 2, kInject = 3, kTimer = 4 };

} // namespace

const char* to_string(EventKind k) {
  switch (k) {
  case EventKind::Send: return "send";
  case EventKind::Enqueue: return "enqueue";
  case EventKind::BeginTransmit: return "begin_transmit";
  case EventKind::Deliver: return "deliver";
  case EventKind::Drop: return "drop";
  }
  return "?";
}

bool Simulator::Pending::operator>(const Pending& o) const {
  return std::tie(time, order, location, msg, seq) > std::tie(o.time, o.order, o.location, o.msg, o.seq);
}

Simulator::Simulator(const Topology& topology, Options options) : topo_(topology), opts_(std::move(options)) {
  const std::size_t R = topo_.router_count();
  pools_.resize(R);
  for (std::size_t r = 0; r < R; ++r) {
    const std::string& id = topo_.routers()[r];
    auto it = opts_.queue_sizes.find(id);
    if (it == opts_.queue_sizes.end()) throw Error("no queue size given for router '" + id + "'");
    pools_[r].capacity = it->second;
    pools_[r].owner = id;
  }
  channels_.resize(topo_.links().size() * 2);
  for (std::size_t i = 0; i < topo_.links().size(); ++i) {
    const Link& l = topo_.links()[i];
    std::size_t a = topo_.index_of(l.a), b = topo_.index_of(l.b);
    for (auto [dir, from, to] : {std::tuple{0u, a, b}, std::tuple{1u, b, a}}) {
      Channel& ch = channels_[2 * i + dir];
      ch.from = from;
      ch.to = to;
      ch.bandwidth_bps = l.bandwidth_bps;
      ch.delay_s = l.delay_s;
      if (topo_.is_router(from) && topo_.is_router(to)) {
        ch.pool = from;
      } else if (topo_.is_router(from) && opts_.edge_queue_capacity) {
        pools_.push_back(Pool{*opts_.edge_queue_capacity, 0, 0, topo_.name_of(from) + ">" + topo_.name_of(to)});
        ch.pool = pools_.size() - 1;
      }
    }
  }
  if (opts_.client_processing_rate && !(*opts_.client_processing_rate > 0.0))
    throw Error("client processing rate must be positive");
  trace_.node_names.reserve(topo_.node_count());
  for (std::size_t n = 0; n < topo_.node_count(); ++n) trace_.node_names.push_back(topo_.name_of(n));
  for (const auto& r : topo_.routers()) trace_.peak_occupancy[r] = 0;
}

void Simulator::push(double time, Step order, std::size_t location, std::uint64_t msg, int type,
                     std::size_t where) {
  agenda_.push(Pending{time, static_cast<int>(order), location, msg, seq_++, type, where});
}

std::size_t Simulator::channel_index(std::size_t from, std::size_t to) const {
  std::size_t link = topo_.link_between(from, to);
  return 2 * link + (channels_[2 * link].from == from ? 0 : 1);
}

void Simulator::record(EventKind kind, const Message& m, std::size_t location, std::optional<std::size_t> peer,
                       bool from_queue) {
  if (!opts_.record_events) return;
  trace_.events.push_back(SimEvent{now_, kind, m.id, m.src, m.dst, location, peer, from_queue});
}

std::uint64_t Simulator::send(double at, std::size_t src, std::size_t dst, MessageKind kind, std::uint32_t bytes,
                              std::shared_ptr<const std::vector<bool>> listed) {
  if (!(at >= 0.0) || !std::isfinite(at)) throw Error("injection time must be finite and non-negative");
  if (at < now_) throw Error("cannot inject a message in the past");
  if (src >= topo_.node_count() || topo_.is_router(src)) throw Error("messages must originate at an end node");
  if (bytes == 0) throw Error("message size must be positive");
  if (dst != kAllServices && (dst >= topo_.node_count() || topo_.is_router(dst) || dst == src))
    throw Error("unroutable destination for message from '" + topo_.name_of(src) + "'");
  Message m;
  m.id = messages_.size();
  m.src = src;
  m.dst = dst;
  m.kind = kind;
  m.size_bytes = bytes;
  m.created_s = at;
  m.listed = std::move(listed);
  messages_.push_back(std::move(m));
  push(at, Step::Inject, src, messages_.back().id, kInject, src);
  return messages_.back().id;
}

void Simulator::schedule(double at, Timer fn) {
  if (at < now_) throw Error("cannot schedule a timer in the past");
  timers_.push_back(std::move(fn));
  push(at, Step::Timer, std::numeric_limits<std::size_t>::max(), 0, kTimer, timers_.size() - 1);
}

void Simulator::offer(std::size_t channel, std::uint64_t msg) {
  Channel& ch = channels_[channel];
  if (!ch.busy) {
    begin_transmit(channel, msg, false);
    return;
  }
  if (ch.pool) {
    Pool& pool = pools_[*ch.pool];
    if (pool.occupancy >= pool.capacity) {
      drop(messages_[msg], ch.from, ch.to, pool.owner);
      return;
    }
    ++pool.occupancy;
    pool.peak = std::max(pool.peak, pool.occupancy);
    if (*ch.pool < topo_.router_count()) {
      auto& peak = trace_.peak_occupancy[pool.owner];
      peak = std::max(peak, pool.occupancy);
    }
  }
  ch.waiting.push_back(msg);
  record(EventKind::Enqueue, messages_[msg], ch.from, ch.to);
}

void Simulator::begin_transmit(std::size_t channel, std::uint64_t msg, bool from_queue) {
  Channel& ch = channels_[channel];
  ch.busy = true;
  record(EventKind::BeginTransmit, messages_[msg], ch.from, ch.to, from_queue);
  double done = now_ + messages_[msg].size_bytes * 8.0 / ch.bandwidth_bps;
  push(done, Step::TxComplete, ch.from, msg, kTxComplete, channel);
}

void Simulator::drop(const Message& m, std::size_t location, std::optional<std::size_t> peer,
                     const std::string& owner) {
  ++trace_.counters.dropped;
  ++trace_.counters.dropped_at[owner];
  record(EventKind::Drop, m, location, peer);
}

std::uint64_t Simulator::copy_of(std::uint64_t msg) {
  Message c = messages_[msg];
  c.id = messages_.size();
  messages_.push_back(std::move(c));
  ++trace_.counters.copies;
  return messages_.back().id;
}

void Simulator::arrive(std::size_t channel, std::uint64_t msg) {
  const std::size_t node = channels_[channel].to;
  const std::size_t prev = channels_[channel].from;
  const Message& m = messages_[msg];
  if (!topo_.is_router(node)) {
    deliver(node, msg);
    return;
  }
  if (m.dst != kAllServices) {
    offer(channel_index(node, topo_.next_hop(node, m.dst)), msg);
    return;
  }
  std::vector<std::size_t> targets;
  for (std::size_t nb : topo_.neighbors(node)) {
    if (nb == prev) continue;
    bool wanted = topo_.is_router(nb) ? topo_.branch_has_services(node, nb)
                                      : topo_.end_node(nb).kind == EndKind::Service;
    if (wanted) targets.push_back(nb);
  }
  for (std::size_t i = 0; i < targets.size(); ++i) {
    std::uint64_t id = i == 0 ? msg : copy_of(msg);
    offer(channel_index(node, targets[i]), id);
  }
}

void Simulator::deliver(std::size_t node, std::uint64_t msg) {
  const bool client = topo_.end_node(node).kind == EndKind::Client;
  if (client && opts_.client_processing_rate) {
    ClientInbox& box = inboxes_[node];
    box.pool.capacity = opts_.client_queue_capacity;
    box.pool.owner = topo_.name_of(node);
    if (!box.busy) {
      box.busy = true;
      push(now_ + 1.0 / *opts_.client_processing_rate, Step::ProcComplete, node, msg, kProcComplete, node);
    } else if (box.pool.occupancy >= box.pool.capacity) {
      drop(messages_[msg], node, std::nullopt, box.pool.owner);
    } else {
      ++box.pool.occupancy;
      box.pool.peak = std::max(box.pool.peak, box.pool.occupancy);
      box.waiting.push_back(msg);
      record(EventKind::Enqueue, messages_[msg], node);
    }
    return;
  }
  ++trace_.counters.delivered;
  record(EventKind::Deliver, messages_[msg], node);
  if (on_deliver_) {
    const Message m = messages_[msg]; // handlers may send, growing messages_
    on_deliver_(*this, m, node, now_);
  }
}

void Simulator::run() {
  while (!agenda_.empty()) {
    Pending p = agenda_.top();
    agenda_.pop();
    now_ = p.time;
    switch (p.type) {
    case kInject: {
      ++trace_.counters.sent;
      const Message& m = messages_[p.msg];
      record(EventKind::Send, m, m.src);
      offer(channel_index(m.src, topo_.attachment(m.src)), p.msg);
      break;
    }
    case kTxComplete: {
      Channel& ch = channels_[p.where];
      push(now_ + ch.delay_s, Step::Arrive, ch.to, p.msg, kArrive, p.where);
      if (!ch.waiting.empty()) {
        std::uint64_t next = ch.waiting.front();
        ch.waiting.pop_front();
        if (ch.pool) --pools_[*ch.pool].occupancy;
        begin_transmit(p.where, next, true);
      } else {
        ch.busy = false;
      }
      break;
    }
    case kArrive:
      arrive(p.where, p.msg);
      break;
    case kProcComplete: {
      ClientInbox& box = inboxes_[p.where];
      ++trace_.counters.delivered;
      record(EventKind::Deliver, messages_[p.msg], p.where);
      if (!box.waiting.empty()) {
        std::uint64_t next = box.waiting.front();
        box.waiting.pop_front();
        --box.pool.occupancy;
        push(now_ + 1.0 / *opts_.client_processing_rate, Step::ProcComplete, p.where, next, kProcComplete, p.where);
      } else {
        box.busy = false;
      }
      if (on_deliver_) {
        const Message m = messages_[p.msg];
        on_deliver_(*this, m, p.where, now_);
      }
      break;
    }
    case kTimer: {
      Timer fn = std::move(timers_[p.where]);
      fn(*this);
      break;
    }
    }
  }
}

SimTrace run(const Topology& t, const std::vector<Injection>& workload, const Options& options) {
  Simulator s(t, options);
  for (const auto& w : workload) {
    auto src = t.find(w.src);
    if (!src) throw Error("workload source '" + w.src + "' is unknown");
    std::size_t dst = kAllServices;
    if (w.dst != "*") {
      auto d = t.find(w.dst);
      if (!d) throw Error("workload destination '" + w.dst + "' is unknown");
      dst = *d;
    }
    s.send(w.time_s, *src, dst, w.kind, w.size_bytes);
  }
  s.run();
  return s.take_trace();
}

std::map<std::string, std::size_t> peak_occupancy(const SimTrace& trace) {
  std::map<std::string, std::size_t> peak, cur;
  const std::size_t routers = trace.peak_occupancy.size();
  for (const auto& [r, _] : trace.peak_occupancy) peak[r] = 0;
  auto shared = [&](const SimEvent& e) { return e.peer && e.location < routers && *e.peer < routers; };
  for (const auto& e : trace.events) {
    if (!shared(e)) continue;
    const std::string& r = trace.node_names[e.location];
    if (e.kind == EventKind::Enqueue) {
      peak[r] = std::max(peak[r], ++cur[r]);
    } else if (e.kind == EventKind::BeginTransmit && e.from_queue) {
      --cur[r];
    }
  }
  return peak;
}

void write_trace(const SimTrace& trace, std::ostream& out) {
  auto name = [&](std::size_t n) { return n == kAllServices ? std::string("*") : trace.node_names[n]; };
  for (const auto& e : trace.events) {
    out << format_number(e.time_s) << '\t' << to_string(e.kind) << '\t' << e.msg << '\t' << name(e.src) << '\t'
        << name(e.dst) << '\t' << trace.node_names[e.location];
    if (e.peer) out << '>' << trace.node_names[*e.peer];
    out << '\n';
  }
}

void write_counters(const SimTrace& trace, std::ostream& out) {
  const auto& c = trace.counters;
  out << "sent=" << c.sent << '\n'
      << "copies=" << c.copies << '\n'
      << "delivered=" << c.delivered << '\n'
      << "dropped=" << c.dropped << '\n';
  for (const auto& [owner, n] : c.dropped_at) out << "dropped." << owner << '=' << n << '\n';
  for (const auto& [r, n] : trace.peak_occupancy) out << "peak." << r << '=' << n << '\n';
}

} // namespace burstpace::sim
