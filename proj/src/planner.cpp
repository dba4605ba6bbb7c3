#include "burstpace/planner.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace burstpace {

namespace {

std::size_t router_index(const Topology& t, const std::string& id) {
  auto idx = t.find(id);
  if (!idx || !t.is_router(*idx)) throw Error("unknown router '" + id + "'");
  return *idx;
}

/// Round a time up to the configured step. Uses the integer step count when
/// 1/step is integral so that e.g. 79 steps of 0.002 prints as 0.158.
struct StepClock {
  std::optional<double> step;
  std::optional<double> per_second; // 1/step when integral

  explicit StepClock(std::optional<double> s) : step(s) {
    if (step) {
      if (!(*step > 0.0)) throw Error("tsom rounding step must be positive");
      double inv = 1.0 / *step;
      if (std::fabs(inv - std::round(inv)) < 1e-9 * inv) per_second = std::round(inv);
    }
  }

  long long steps_up(double x) const {
    double q = x / *step;
    double r = std::round(q);
    if (std::fabs(q - r) < 1e-9 * std::max(1.0, q)) return static_cast<long long>(r);
    return static_cast<long long>(std::ceil(q));
  }

  double from_steps(long long k) const {
    return per_second ? static_cast<double>(k) / *per_second : static_cast<double>(k) * *step;
  }

  double round_up(double x) const { return step ? from_steps(steps_up(x)) : x; }
};

double raw_message_time(double bytes, double bandwidth_bps) { return bytes * 8.0 / bandwidth_bps; }

/// Largest single-message time among the services whose messages travel
/// towards `target`, using the slowest link on each path.
double max_message_time(const Topology& t, std::size_t target, const StepClock& clock, double floor_s) {
  double best = floor_s;
  for (std::size_t n = t.router_count(); n < t.node_count(); ++n) {
    const EndNode& e = t.end_node(n);
    if (e.kind != EndKind::Service) continue;
    double min_bw = t.links()[t.link_between(n, t.attachment(n))].bandwidth_bps;
    for (std::size_t cur = t.attachment(n); cur != target;) {
      std::size_t nxt = t.next_hop(cur, target);
      min_bw = std::min(min_bw, t.links()[t.link_between(cur, nxt)].bandwidth_bps);
      cur = nxt;
    }
    best = std::max(best, clock.round_up(raw_message_time(e.message_bytes, min_bw)));
  }
  return best;
}

/// interval = units * tsom - tj, clamped at zero, rounded on the step grid.
double interval_from_units(long long units, double tsom, double tj, const StepClock& clock) {
  if (clock.step) {
    long long k = units * clock.steps_up(tsom) - clock.steps_up(tj);
    return clock.from_steps(std::max(0LL, k));
  }
  return std::max(0.0, static_cast<double>(units) * tsom - tj);
}

std::size_t nearest_router_where(const Topology& t, std::size_t from, auto&& pred) {
  std::optional<std::size_t> best;
  for (std::size_t r = 0; r < t.router_count(); ++r) {
    if (r == from || !pred(r)) continue;
    if (!best || t.hops(from, r) < t.hops(from, *best)) best = r;
  }
  return best.value_or(from);
}

void require_clients(const Topology& t) {
  if (t.total_clients() == 0) throw Error("topology has no clients to plan for");
}

} // namespace

double message_time(const MessageParams& p) {
  if (p.message_bytes == 0) throw Error("message size must be positive");
  if (!(p.bandwidth_bps > 0.0)) throw Error("bandwidth must be positive");
  return StepClock(p.fixed_step_s).round_up(raw_message_time(p.message_bytes, p.bandwidth_bps));
}

MessageParams default_message_params(const Topology& t, std::optional<double> fixed_step_s) {
  double bytes = 0.0;
  std::size_t services = 0;
  for (const auto& e : t.end_nodes()) {
    if (e.kind != EndKind::Service) continue;
    bytes += e.message_bytes;
    ++services;
  }
  double bw = 0.0;
  for (const auto& l : t.links()) bw += l.bandwidth_bps;
  MessageParams p;
  p.message_bytes = services ? static_cast<std::uint32_t>(std::lround(bytes / services)) : 128;
  p.bandwidth_bps = t.links().empty() ? 1.0 : bw / static_cast<double>(t.links().size());
  p.fixed_step_s = fixed_step_s;
  return p;
}

QueueSizes queue_sizes_decentralized(const Topology& t) {
  if (t.centralized()) throw Error("queue_sizes_decentralized needs a decentralized topology");
  QueueSizes out;
  for (std::size_t r = 0; r < t.router_count(); ++r) {
    std::size_t c = t.clients_at(r), s = t.services_at(r);
    if (c == 0 && s == 0)
      out[t.routers()[r]] = 2;
    else if (c == 0)
      out[t.routers()[r]] = s + 2;
    else
      out[t.routers()[r]] = c + s + 1;
  }
  return out;
}

QueueSizes queue_sizes_centralized(const Topology& t) {
  if (!t.centralized()) throw Error("queue_sizes_centralized needs a centralized topology");
  const long long n = static_cast<long long>(t.total_services());
  if (n == 0) throw Error("centralized queue sizing needs at least one service");
  long long largest = 0;
  for (std::size_t r = 0; r < t.router_count(); ++r)
    largest = std::max<long long>(largest, static_cast<long long>(t.services_at(r)));
  QueueSizes out;
  for (std::size_t r = 0; r < t.router_count(); ++r) {
    const std::string& id = t.routers()[r];
    if (id == t.configuration().root)
      out[id] = static_cast<std::size_t>(std::max(1LL, n - largest - (largest - 1)));
    else
      out[id] = t.clients_at(r) + t.services_at(r);
  }
  return out;
}

QueueSizes queue_sizes(const Topology& t) {
  return t.centralized() ? queue_sizes_centralized(t) : queue_sizes_decentralized(t);
}

std::vector<std::string> candidate_routers_decentralized(const Topology& t) {
  if (t.centralized()) throw Error("candidate_routers_decentralized needs a decentralized topology");
  require_clients(t);
  const std::size_t R = t.router_count();
  auto has_clients = [&](std::size_t r) { return t.clients_at(r) > 0; };
  std::set<std::size_t> picked;

  // Client at the far end of the longest client/service path.
  if (t.total_services() > 0) {
    auto path = longest_client_service_path(t);
    picked.insert(t.attachment(t.index_of(path.client)));
  }

  // Most clients, then most services arriving from one side.
  {
    std::optional<std::size_t> best;
    std::size_t best_side = 0;
    for (std::size_t r = 0; r < R; ++r) {
      if (!has_clients(r)) continue;
      auto parts = split_parts(t, r);
      std::size_t side = std::max(parts.left_services, parts.right_services);
      if (!best || t.clients_at(r) > t.clients_at(*best) ||
          (t.clients_at(r) == t.clients_at(*best) && side > best_side)) {
        best = r;
        best_side = side;
      }
    }
    picked.insert(*best);
  }

  // Client-bearing routers closest to an end of the network.
  {
    std::vector<std::size_t> ends;
    for (std::size_t r = 0; r < R; ++r)
      if (t.router_neighbors(r).size() <= 1) ends.push_back(r);
    std::size_t best = SIZE_MAX;
    std::vector<std::size_t> at_best;
    for (std::size_t r = 0; r < R; ++r) {
      if (!has_clients(r)) continue;
      std::size_t d = SIZE_MAX;
      for (std::size_t e : ends) d = std::min(d, t.hops(r, e));
      if (d < best) {
        best = d;
        at_best.clear();
      }
      if (d == best) at_best.push_back(r);
    }
    picked.insert(at_best.begin(), at_best.end());
  }

  // A lone client is compared with the nearest other client-bearing router.
  std::set<std::size_t> extra;
  for (std::size_t r : picked) {
    if (t.clients_at(r) != 1) continue;
    std::size_t nb = nearest_router_where(t, r, has_clients);
    if (nb != r) extra.insert(nb);
  }
  picked.insert(extra.begin(), extra.end());

  std::vector<std::string> out;
  for (std::size_t r : picked) out.push_back(t.routers()[r]);
  return out;
}

std::vector<std::string> candidate_routers_centralized(const Topology& t) {
  if (!t.centralized()) throw Error("candidate_routers_centralized needs a centralized topology");
  require_clients(t);
  const std::size_t n = t.total_services();
  std::optional<std::size_t> best;
  for (std::size_t r = 0; r < t.router_count(); ++r) {
    if (t.clients_at(r) == 0) continue;
    if (!best) {
      best = r;
      continue;
    }
    std::size_t received = n - t.services_at(r), best_received = n - t.services_at(*best);
    if (t.clients_at(r) > t.clients_at(*best) ||
        (t.clients_at(r) == t.clients_at(*best) && received > best_received))
      best = r;
  }
  std::set<std::size_t> picked{*best};
  if (t.clients_at(*best) == 1) {
    std::size_t nb = nearest_router_where(t, *best, [&](std::size_t r) { return t.clients_at(r) >= 2; });
    if (nb == *best)
      nb = nearest_router_where(t, *best, [&](std::size_t r) { return t.clients_at(r) >= 1; });
    picked.insert(nb);
  }
  std::vector<std::string> out;
  for (std::size_t r : picked) out.push_back(t.routers()[r]);
  return out;
}

std::size_t overlap_space(const Topology& t, const std::string& chosen) {
  const std::size_t r = router_index(t, chosen);
  const std::size_t clients = t.clients_at(r);
  if (clients == 0) throw Error("router '" + chosen + "' has no clients");
  const QueueSizes sizes = queue_sizes(t);

  std::vector<std::size_t> neighbors;
  if (t.centralized()) {
    neighbors = t.router_neighbors(r);
  } else {
    // Every neighbour whose branch carries the maximal service count.
    std::size_t best = 0;
    for (std::size_t nb : t.router_neighbors(r)) {
      std::size_t s = 0;
      for (std::size_t x = 0; x < t.router_count(); ++x)
        if (x != r && t.hops(x, nb) < t.hops(x, r)) s += t.services_at(x);
      if (neighbors.empty() || s > best) {
        neighbors = {nb};
        best = s;
      } else if (s == best) {
        neighbors.push_back(nb);
      }
    }
  }
  if (neighbors.empty()) return 0;

  std::size_t result = SIZE_MAX;
  for (std::size_t nb : neighbors) {
    long long spare = static_cast<long long>(sizes.at(t.routers()[nb])) - static_cast<long long>(t.services_at(nb));
    std::size_t os = spare > 0 ? static_cast<std::size_t>(spare) / clients : 0;
    result = std::min(result, os);
  }
  return result;
}

std::size_t gap_slots(const Topology& t, const std::string& chosen) {
  const std::size_t target = router_index(t, chosen);
  const std::size_t R = t.router_count();
  std::vector<std::size_t> waiting(R, 0), incoming(R, 0);
  std::size_t in_flight = 0;
  for (std::size_t r = 0; r < R; ++r) {
    if (r == target) continue;
    waiting[r] = t.services_at(r); // access hop ends at slot 1
    in_flight += waiting[r];
  }
  std::vector<std::size_t> arrivals; // slots with at least one neighbour arrival
  for (std::size_t slot = 1; in_flight > 0; ++slot) {
    bool arrived = false;
    for (std::size_t r = 0; r < R; ++r) {
      if (r == target || waiting[r] == 0) continue;
      --waiting[r];
      std::size_t nxt = t.next_hop(r, target);
      if (nxt == target) {
        arrived = true;
        --in_flight;
      } else {
        ++incoming[nxt];
      }
    }
    if (arrived) arrivals.push_back(slot + 1);
    for (std::size_t r = 0; r < R; ++r) {
      waiting[r] += incoming[r];
      incoming[r] = 0;
    }
  }
  if (arrivals.empty()) return 0;
  return arrivals.back() - arrivals.size();
}

Plan best_interval_decentralized(const Topology& t, const MessageParams& p) {
  if (t.centralized()) throw Error("best_interval_decentralized needs a decentralized topology");
  const StepClock clock(p.fixed_step_s);
  Plan out;
  out.queue_sizes = queue_sizes_decentralized(t);
  out.candidates = candidate_routers_decentralized(t);
  if (out.candidates.empty()) throw Error("no candidate routers");
  out.tsom_s = message_time(p);

  std::optional<std::size_t> best;
  for (const auto& id : out.candidates) {
    const std::size_t r = router_index(t, id);
    CandidateEvaluation ev;
    ev.router = id;
    auto parts = split_parts(t, r);
    ev.large = std::max(parts.left_services, parts.right_services);
    ev.gaps = gap_slots(t, id);
    ev.overlap_space = overlap_space(t, id);
    double tj = max_message_time(t, r, clock, out.tsom_s);
    long long units = static_cast<long long>(ev.large + ev.gaps) - static_cast<long long>(ev.overlap_space);
    ev.interval_s = interval_from_units(units, out.tsom_s, tj, clock);
    out.evaluations.push_back(ev);
    if (!best || ev.interval_s > out.evaluations[*best].interval_s) {
      best = out.evaluations.size() - 1;
      out.max_message_time_s = tj;
    }
  }
  const auto& win = out.evaluations[*best];
  out.chosen = win.router;
  out.large = win.large;
  out.gap_slots = win.gaps;
  out.overlap_space = win.overlap_space;
  out.best_interval_s = win.interval_s;
  return out;
}

Plan best_interval_centralized(const Topology& t, const MessageParams& p) {
  if (!t.centralized()) throw Error("best_interval_centralized needs a centralized topology");
  const StepClock clock(p.fixed_step_s);
  Plan out;
  out.centralized = true;
  out.queue_sizes = queue_sizes_centralized(t);
  out.candidates = candidate_routers_centralized(t);
  out.tsom_s = message_time(p);
  const std::size_t n = t.total_services();

  std::optional<std::size_t> best;
  for (const auto& id : out.candidates) {
    const std::size_t r = router_index(t, id);
    CandidateEvaluation ev;
    ev.router = id;
    ev.large = n;
    ev.gaps = gap_slots(t, id);
    ev.local_services = t.services_at(r);
    double tj = max_message_time(t, r, clock, out.tsom_s);
    long long units = static_cast<long long>(n + ev.gaps) - static_cast<long long>(ev.local_services);
    ev.interval_s = interval_from_units(units, out.tsom_s, tj, clock);
    out.evaluations.push_back(ev);
    if (!best || ev.interval_s > out.evaluations[*best].interval_s) {
      best = out.evaluations.size() - 1;
      out.max_message_time_s = tj;
    }
  }
  const auto& win = out.evaluations[*best];
  out.chosen = win.router;
  out.large = win.large;
  out.gap_slots = win.gaps;
  out.local_services = win.local_services;
  out.best_interval_s = win.interval_s;

  std::size_t largest = 0;
  for (std::size_t r = 0; r < t.router_count(); ++r) largest = std::max(largest, t.services_at(r));
  out.root_fill_time_s = out.max_message_time_s + static_cast<double>(largest) * out.tsom_s;
  return out;
}

Plan plan(const Topology& t, const MessageParams& p) {
  require_clients(t);
  return t.centralized() ? best_interval_centralized(t, p) : best_interval_decentralized(t, p);
}

Topology make_chain(std::size_t routers, std::size_t clients_per_router, std::size_t services_per_router,
                    std::uint32_t message_bytes, double bandwidth_bps) {
  if (routers == 0) throw Error("chain needs at least one router");
  std::vector<std::string> ids;
  std::vector<EndNode> ends;
  std::vector<Link> links;
  // Zero-padded ids keep lexicographic order equal to chain order.
  const int width = static_cast<int>(std::to_string(std::max<std::size_t>(routers, 1) - 1).size());
  auto pad = [](std::size_t v, int w) {
    std::string s = std::to_string(v);
    return std::string(static_cast<std::size_t>(std::max(0, w - static_cast<int>(s.size()))), '0') + s;
  };
  const std::size_t total_c = routers * clients_per_router, total_s = routers * services_per_router;
  const int cw = static_cast<int>(std::to_string(std::max<std::size_t>(total_c, 1) - 1).size());
  const int sw = static_cast<int>(std::to_string(std::max<std::size_t>(total_s, 1) - 1).size());
  std::size_t c = 0, s = 0;
  for (std::size_t r = 0; r < routers; ++r) {
    ids.push_back("R" + pad(r, width));
    if (r > 0) links.push_back({ids[r - 1], ids[r], bandwidth_bps, 0.0});
    for (std::size_t k = 0; k < clients_per_router; ++k) {
      std::string id = "C" + pad(c++, cw);
      ends.push_back({id, EndKind::Client, ids[r], 0});
      links.push_back({ids[r], id, bandwidth_bps, 0.0});
    }
    for (std::size_t k = 0; k < services_per_router; ++k) {
      std::string id = "S" + pad(s++, sw);
      ends.push_back({id, EndKind::Service, ids[r], message_bytes});
      links.push_back({ids[r], id, bandwidth_bps, 0.0});
    }
  }
  return Topology(Configuration{}, std::move(ids), std::move(ends), std::move(links));
}

std::vector<IntervalCell> interval_table(const std::vector<std::size_t>& router_counts,
                                         const std::vector<std::size_t>& per_router, const MessageParams& p) {
  std::vector<IntervalCell> out;
  for (std::size_t k : per_router) {
    if (k == 0) throw Error("each router needs at least one client and one service");
    for (std::size_t n : router_counts) {
      if (n == 0) throw Error("router count must be at least 1");
      Topology chain = make_chain(n, k, k, p.message_bytes, p.bandwidth_bps);
      Plan pl = plan(chain, p);
      out.push_back({n, k, 2 * k * n, std::round(pl.interval_in_tsom() * 1e6) / 1e6});
    }
  }
  return out;
}

} // namespace burstpace
