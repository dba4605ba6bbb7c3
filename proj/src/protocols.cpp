#include "burstpace/protocols.hpp"

#include "burstpace/format.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace burstpace::protocols {

namespace {

std::vector<std::size_t> nodes_of_kind(const Topology& t, EndKind kind) {
  std::vector<std::size_t> out;
  for (std::size_t n = t.router_count(); n < t.node_count(); ++n)
    if (t.end_node(n).kind == kind) out.push_back(n);
  return out;
}

sim::Options sim_options(const QueueSizes& queues, const RunOptions& options) {
  sim::Options o;
  o.queue_sizes = queues;
  o.edge_queue_capacity = options.edge_queue_capacity;
  o.record_events = options.trace != nullptr;
  return o;
}

/// Which services each client has heard from, by node index.
class DiscoveryBook {
public:
  explicit DiscoveryBook(const Topology& t)
      : nodes_(t.node_count()), known_(t.node_count() * t.node_count(), false),
        pairs_(t.total_clients() * t.total_services()) {}

  /// True when the pair is new.
  bool learn(std::size_t client, std::size_t service) {
    auto ref = known_[client * nodes_ + service];
    if (ref) return false;
    ref = true;
    ++learned_;
    return true;
  }

  std::shared_ptr<const std::vector<bool>> snapshot(std::size_t client) const {
    auto v = std::make_shared<std::vector<bool>>(nodes_, false);
    for (std::size_t s = 0; s < nodes_; ++s) (*v)[s] = known_[client * nodes_ + s];
    return v;
  }

  double percent() const {
    return pairs_ ? 100.0 * static_cast<double>(learned_) / static_cast<double>(pairs_) : 100.0;
  }

private:
  std::size_t nodes_;
  std::vector<bool> known_;
  std::size_t pairs_;
  std::size_t learned_ = 0;
};

void finish(sim::Simulator& s, ScenarioMetrics& m, const RunOptions& options) {
  m.dropped = s.trace().counters.dropped;
  m.peak_occupancy = s.trace().peak_occupancy;
  if (options.trace) *options.trace = s.take_trace();
}

} // namespace

BackTrafficFlow parse_back_traffic(const std::string& spec) {
  auto f = split(spec, ':');
  if (f.size() != 4) throw Error("back-traffic must look like SERVICE:CLIENT:COUNT:PERIOD, got '" + spec + "'");
  BackTrafficFlow flow;
  flow.service = f[0];
  flow.client = f[1];
  try {
    std::size_t used = 0;
    long long count = std::stoll(f[2], &used);
    if (used != f[2].size() || count < 0) throw Error("");
    flow.count = static_cast<std::size_t>(count);
    flow.period_s = std::stod(f[3], &used);
    if (used != f[3].size() || !(flow.period_s >= 0.0)) throw Error("");
  } catch (const std::exception&) {
    throw Error("invalid count or period in back-traffic '" + spec + "'");
  }
  return flow;
}

ScenarioMetrics run_paced(const Topology& t, const QueueSizes& queues, const PacedDiscoveryConfig& cfg,
                          const RunOptions& options) {
  if (!(cfg.interval_s >= 0.0)) throw Error("interval must be non-negative");
  const auto clients = nodes_of_kind(t, EndKind::Client);
  const auto services = nodes_of_kind(t, EndKind::Service);

  struct Flow {
    std::size_t src, dst;
  };
  std::vector<Flow> flows;
  for (const auto& bt : cfg.back_traffic) {
    auto s = t.find(bt.service), c = t.find(bt.client);
    if (!s || t.is_router(*s) || t.end_node(*s).kind != EndKind::Service)
      throw Error("back-traffic source '" + bt.service + "' is not a service");
    if (!c || t.is_router(*c) || t.end_node(*c).kind != EndKind::Client)
      throw Error("back-traffic destination '" + bt.client + "' is not a client");
    flows.push_back({*s, *c});
  }

  sim::Simulator s(t, sim_options(queues, options));
  ScenarioMetrics m;
  m.multicast_rounds = clients.empty() ? 0 : 1;
  const std::size_t nodes = t.node_count();
  std::vector<bool> heard(nodes * nodes, false); // [service][client]
  DiscoveryBook book(t);
  double last_reply = 0.0;

  s.on_deliver([&](sim::Simulator&, const sim::Message& msg, std::size_t node, double now) {
    switch (msg.kind) {
    case sim::MessageKind::MulticastQuery:
      heard[node * nodes + msg.src] = true;
      break;
    case sim::MessageKind::UnicastReply:
      if (!book.learn(msg.dst, msg.src)) ++m.duplicates_received;
      last_reply = std::max(last_reply, now);
      break;
    case sim::MessageKind::BackTraffic:
      ++m.back_traffic_delivered;
      break;
    }
  });

  for (std::size_t c : clients) s.send(0.0, c, sim::kAllServices, sim::MessageKind::MulticastQuery, cfg.query_bytes);
  s.run();
  const double start = s.now();
  m.multicast_time_s = start;

  for (std::size_t i = 0; i < clients.size(); ++i) {
    const double at = start + static_cast<double>(i) * cfg.interval_s;
    for (std::size_t svc : services) {
      if (!heard[svc * nodes + clients[i]]) continue;
      s.send(at, svc, clients[i], sim::MessageKind::UnicastReply, cfg.reply_bytes);
      ++m.replies_sent;
    }
  }
  for (std::size_t f = 0; f < flows.size(); ++f) {
    const auto& bt = cfg.back_traffic[f];
    for (std::size_t k = 0; k < bt.count; ++k) {
      s.send(start + cfg.back_traffic_offset_s + static_cast<double>(k) * bt.period_s, flows[f].src, flows[f].dst,
             sim::MessageKind::BackTraffic, cfg.reply_bytes);
      ++m.back_traffic_sent;
    }
  }
  s.run();

  m.discovery_time_s = last_reply;
  m.per_round_discovered_pct = {book.percent()};
  finish(s, m, options);
  return m;
}

ScenarioMetrics run_paced(const Topology& t, const Plan& plan, const PacedDiscoveryConfig& cfg,
                          const RunOptions& options) {
  return run_paced(t, plan.queue_sizes, cfg, options);
}

ScenarioMetrics run_max_limit(const Topology& t, const MaxLimitDiscoveryConfig& cfg, const QueueSizes& queues,
                              const RunOptions& options) {
  if (!(cfg.timeout_s > 0.0)) throw Error("maximum-limit timeout must be positive");
  if (cfg.round_cap == 0) throw Error("round cap must be positive");
  const auto clients = nodes_of_kind(t, EndKind::Client);

  struct ClientState {
    std::size_t rounds = 0;
    std::size_t fresh = 0; // new services since the last query
    bool active = false;
  };
  std::vector<ClientState> state(t.node_count());
  DiscoveryBook book(t);
  ScenarioMetrics m;
  double last_new = 0.0;

  sim::Simulator s(t, sim_options(queues, options));
  s.on_deliver([&](sim::Simulator& sm, const sim::Message& msg, std::size_t node, double now) {
    if (msg.kind == sim::MessageKind::MulticastQuery) {
      if (msg.listed && (*msg.listed)[node]) return;
      sm.send(now, node, msg.src, sim::MessageKind::UnicastReply, cfg.reply_bytes);
      ++m.replies_sent;
    } else if (msg.kind == sim::MessageKind::UnicastReply) {
      if (book.learn(msg.dst, msg.src)) {
        ++state[msg.dst].fresh;
        last_new = now;
      } else {
        ++m.duplicates_received;
      }
    }
  });

  auto query = [&](sim::Simulator& sm, std::size_t c, double at) {
    auto& st = state[c];
    if (st.rounds == cfg.round_cap)
      throw Error("maximum-limit discovery exceeded " + std::to_string(cfg.round_cap) + " rounds");
    ++st.rounds;
    st.fresh = 0;
    sm.send(at, c, sim::kAllServices, sim::MessageKind::MulticastQuery, cfg.query_bytes, book.snapshot(c));
  };

  // All clients share the same timeout, so round boundaries line up and a
  // single timer per boundary serves every client in id order.
  std::function<void(sim::Simulator&)> boundary = [&](sim::Simulator& sm) {
    m.per_round_discovered_pct.push_back(book.percent());
    bool any = false;
    for (std::size_t c : clients) {
      auto& st = state[c];
      if (!st.active) continue;
      if (st.fresh == 0) {
        st.active = false;
        continue;
      }
      query(sm, c, sm.now());
      any = true;
    }
    if (any) sm.schedule(sm.now() + cfg.timeout_s, boundary);
  };

  for (std::size_t c : clients) {
    state[c].active = true;
    query(s, c, 0.0);
  }
  if (!clients.empty()) s.schedule(cfg.timeout_s, boundary);
  s.run();

  for (std::size_t c : clients) m.multicast_rounds = std::max(m.multicast_rounds, state[c].rounds);
  m.discovery_time_s = last_new;
  if (m.per_round_discovered_pct.empty() || m.per_round_discovered_pct.back() != book.percent())
    m.per_round_discovered_pct.push_back(book.percent());
  finish(s, m, options);
  return m;
}

std::uint64_t paced_drops(const Topology& t, const QueueSizes& queues, double interval_s, std::uint32_t bytes,
                          const RunOptions& options) {
  PacedDiscoveryConfig cfg;
  cfg.interval_s = interval_s;
  cfg.reply_bytes = bytes;
  cfg.query_bytes = bytes;
  RunOptions quiet = options;
  quiet.trace = nullptr;
  return run_paced(t, queues, cfg, quiet).dropped;
}

OracleGrid oracle_grid(const Topology& t, const MessageParams& p) {
  OracleGrid g;
  g.step_s = message_time(p) / 4.0;
  const std::size_t n = t.total_services();
  g.max_steps = 4 * 2 * (n + 1) * (t.router_count() + 2);
  return g;
}

std::optional<double> min_zero_drop_interval(const Topology& t, const QueueSizes& queues, const MessageParams& p,
                                             const RunOptions& options) {
  const OracleGrid g = oracle_grid(t, p);
  auto drops_at = [&](std::size_t steps) {
    return paced_drops(t, queues, static_cast<double>(steps) * g.step_s, p.message_bytes, options) > 0;
  };
  if (!drops_at(0)) return 0.0;
  std::size_t lo = 0, hi = 1;
  while (drops_at(hi)) {
    if (hi >= g.max_steps) return std::nullopt;
    lo = hi;
    hi = std::min(hi * 2, g.max_steps);
  }
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    (drops_at(mid) ? lo : hi) = mid;
  }
  return static_cast<double>(hi) * g.step_s;
}

void write_metrics(const ScenarioMetrics& m, std::ostream& out, std::optional<int> decimals) {
  out << "multicast_rounds=" << m.multicast_rounds << '\n'
      << "dropped=" << m.dropped << '\n'
      << "replies_sent=" << m.replies_sent << '\n'
      << "duplicates_received=" << m.duplicates_received << '\n'
      << "discovery_time=" << format_number(m.discovery_time_s, decimals) << '\n'
      << "multicast_time=" << format_number(m.multicast_time_s, decimals) << '\n';
  std::vector<std::string> pct;
  for (double v : m.per_round_discovered_pct) pct.push_back(format_number(v, decimals));
  out << "per_round_discovered_pct=" << join(pct, ",") << '\n'
      << "back_traffic_sent=" << m.back_traffic_sent << '\n'
      << "back_traffic_delivered=" << m.back_traffic_delivered << '\n';
  for (const auto& [router, peak] : m.peak_occupancy) out << "peak." << router << '=' << peak << '\n';
}

std::string metrics_csv_header() {
  return "label,multicast_rounds,dropped,replies_sent,duplicates_received,discovery_time_s,multicast_time_s,"
         "discovered_pct,back_traffic_sent,back_traffic_delivered";
}

std::string metrics_csv_row(const std::string& label, const ScenarioMetrics& m, std::optional<int> decimals) {
  const double pct = m.per_round_discovered_pct.empty() ? 0.0 : m.per_round_discovered_pct.back();
  return join({label, std::to_string(m.multicast_rounds), std::to_string(m.dropped), std::to_string(m.replies_sent),
               std::to_string(m.duplicates_received), format_number(m.discovery_time_s, decimals),
               format_number(m.multicast_time_s, decimals), format_number(pct, decimals),
               std::to_string(m.back_traffic_sent), std::to_string(m.back_traffic_delivered)},
              ",");
}

std::vector<ComparisonColumn> compare(const Topology& t, const Plan& plan, const std::vector<double>& timeouts,
                                      std::uint32_t message_bytes, const RunOptions& options) {
  std::vector<ComparisonColumn> cols;
  PacedDiscoveryConfig paced;
  paced.interval_s = plan.best_interval_s;
  paced.reply_bytes = message_bytes;
  paced.query_bytes = message_bytes;
  RunOptions quiet = options;
  quiet.trace = nullptr;
  cols.push_back({"paced " + format_number(plan.best_interval_s), run_paced(t, plan, paced, quiet)});
  for (double timeout : timeouts) {
    MaxLimitDiscoveryConfig ml;
    ml.timeout_s = timeout;
    ml.reply_bytes = message_bytes;
    ml.query_bytes = message_bytes;
    cols.push_back({"maxlimit " + format_number(timeout), run_max_limit(t, ml, plan.queue_sizes, quiet)});
  }
  return cols;
}

void write_comparison(const std::vector<ComparisonColumn>& cols, std::ostream& out, std::optional<int> decimals) {
  struct Row {
    std::string name;
    std::vector<std::string> cells;
  };
  std::vector<Row> rows = {{"", {}},
                           {"multicast rounds", {}},
                           {"replies sent", {}},
                           {"dropped", {}},
                           {"duplicates received", {}},
                           {"discovery time (s)", {}},
                           {"discovered per round (%)", {}}};
  for (const auto& c : cols) {
    const auto& m = c.metrics;
    std::vector<std::string> pct;
    for (double v : m.per_round_discovered_pct) pct.push_back(format_number(v, decimals ? decimals : 1));
    rows[0].cells.push_back(c.label);
    rows[1].cells.push_back(std::to_string(m.multicast_rounds));
    rows[2].cells.push_back(std::to_string(m.replies_sent));
    rows[3].cells.push_back(std::to_string(m.dropped));
    rows[4].cells.push_back(std::to_string(m.duplicates_received));
    rows[5].cells.push_back(format_number(m.discovery_time_s, decimals));
    rows[6].cells.push_back(join(pct, "/"));
  }
  std::size_t name_w = 0;
  std::vector<std::size_t> w(cols.size(), 0);
  for (const auto& r : rows) {
    name_w = std::max(name_w, r.name.size());
    for (std::size_t i = 0; i < r.cells.size(); ++i) w[i] = std::max(w[i], r.cells[i].size());
  }
  for (const auto& r : rows) {
    std::ostringstream line;
    line << std::left << std::setw(static_cast<int>(name_w)) << r.name;
    for (std::size_t i = 0; i < r.cells.size(); ++i)
      line << "  " << std::right << std::setw(static_cast<int>(w[i])) << r.cells[i];
    std::string s = line.str();
    s.erase(s.find_last_not_of(' ') + 1);
    out << s << '\n';
  }
}

} // namespace burstpace::protocols
