#include "burstpace/sweep.hpp"

#include <algorithm>
#include <exception>
#include <random>
#include <string>

#include <omp.h>

namespace burstpace::sweep {

namespace {

std::string padded(char prefix, std::size_t v, std::size_t count) {
  const std::size_t width = std::to_string(std::max<std::size_t>(count, 1) - 1).size();
  std::string s = std::to_string(v);
  return prefix + std::string(width - std::min(width, s.size()), '0') + s;
}

TreeCheck check_tree(std::uint64_t seed) {
  const Topology t = random_tree(seed);
  const MessageParams p = default_message_params(t);
  const Plan pl = plan(t, p);
  TreeCheck c;
  c.seed = seed;
  c.best_interval_s = pl.best_interval_s;
  c.tsom_s = pl.tsom_s;
  c.planned_drops = protocols::paced_drops(t, pl.queue_sizes, pl.best_interval_s, p.message_bytes);
  c.tighter_drops =
      protocols::paced_drops(t, pl.queue_sizes, std::max(0.0, pl.best_interval_s - pl.tsom_s), p.message_bytes);
  c.oracle_s = protocols::min_zero_drop_interval(t, pl.queue_sizes, p);
  return c;
}

/// Runs fn(i) for i in [0, n) across threads, rethrowing the first error.
template <class Fn> void parallel_for(std::size_t n, Fn fn) {
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

} // namespace

std::vector<std::uint64_t> drops_over_intervals(const Topology& t, const QueueSizes& queues,
                                                const std::vector<double>& intervals, std::uint32_t bytes,
                                                const protocols::RunOptions& options) {
  std::vector<std::uint64_t> out(intervals.size());
  parallel_for(intervals.size(), [&](std::size_t i) { out[i] = protocols::paced_drops(t, queues, intervals[i], bytes, options); });
  return out;
}

std::vector<std::uint64_t> drops_over_intervals_serial(const Topology& t, const QueueSizes& queues,
                                                       const std::vector<double>& intervals, std::uint32_t bytes,
                                                       const protocols::RunOptions& options) {
  std::vector<std::uint64_t> out;
  out.reserve(intervals.size());
  for (double iv : intervals) out.push_back(protocols::paced_drops(t, queues, iv, bytes, options));
  return out;
}

std::optional<double> min_zero_drop_interval_scan(const Topology& t, const QueueSizes& queues,
                                                  const MessageParams& p, const protocols::RunOptions& options) {
  const protocols::OracleGrid g = protocols::oracle_grid(t, p);
  const std::size_t block = 4 * static_cast<std::size_t>(omp_get_max_threads());
  for (std::size_t first = 0; first <= g.max_steps; first += block) {
    const std::size_t last = std::min(first + block, g.max_steps + 1);
    std::vector<double> intervals;
    for (std::size_t k = first; k < last; ++k) intervals.push_back(static_cast<double>(k) * g.step_s);
    const auto drops = drops_over_intervals(t, queues, intervals, p.message_bytes, options);
    for (std::size_t i = 0; i < drops.size(); ++i)
      if (drops[i] == 0) return intervals[i];
  }
  return std::nullopt;
}

Topology random_tree(std::uint64_t seed, std::size_t max_routers, std::size_t max_end_nodes) {
  if (max_routers == 0) throw Error("random tree needs at least one router");
  std::mt19937_64 rng(seed);
  auto uniform = [&](std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng); };

  const std::size_t routers = uniform(1, max_routers);
  std::vector<std::size_t> parent(routers, 0);
  for (std::size_t r = 1; r < routers; ++r) parent[r] = uniform(0, r - 1);
  std::vector<std::vector<EndKind>> attached(routers);
  for (auto& a : attached) {
    const std::size_t n = uniform(0, max_end_nodes);
    for (std::size_t k = 0; k < n; ++k) a.push_back(uniform(0, 1) ? EndKind::Service : EndKind::Client);
  }
  auto has = [&](EndKind kind) {
    return std::any_of(attached.begin(), attached.end(),
                       [&](const auto& a) { return std::find(a.begin(), a.end(), kind) != a.end(); });
  };
  // Top up a missing kind by flipping a spare node of the other kind, or
  // by adding one where the per-router limit leaves room.
  auto ensure = [&](EndKind want) {
    if (has(want)) return;
    const EndKind other = want == EndKind::Client ? EndKind::Service : EndKind::Client;
    std::vector<EndKind*> spare;
    for (auto& a : attached)
      for (auto& k : a)
        if (k == other) spare.push_back(&k);
    if (spare.size() >= 2) {
      *spare[uniform(0, spare.size() - 1)] = want;
      return;
    }
    const std::size_t start = uniform(0, routers - 1);
    for (std::size_t i = 0; i < routers; ++i) {
      auto& a = attached[(start + i) % routers];
      if (a.size() < max_end_nodes) {
        a.push_back(want);
        return;
      }
    }
    throw Error("no room for both a client and a service");
  };
  ensure(EndKind::Client);
  ensure(EndKind::Service);

  constexpr double bw = 524288.0;
  std::size_t clients = 0, services = 0;
  for (const auto& a : attached)
    for (EndKind k : a) ++(k == EndKind::Client ? clients : services);
  std::vector<std::string> ids;
  for (std::size_t r = 0; r < routers; ++r) ids.push_back(padded('R', r, routers));
  std::vector<Link> links;
  for (std::size_t r = 1; r < routers; ++r) links.push_back({ids[parent[r]], ids[r], bw, 0.0});
  std::vector<EndNode> ends;
  std::size_t c = 0, s = 0;
  for (std::size_t r = 0; r < routers; ++r) {
    for (EndKind k : attached[r]) {
      std::string id = k == EndKind::Client ? padded('C', c++, clients) : padded('S', s++, services);
      ends.push_back({id, k, ids[r], k == EndKind::Service ? 128u : 0u});
      links.push_back({ids[r], id, bw, 0.0});
    }
  }
  return Topology(Configuration{}, std::move(ids), std::move(ends), std::move(links));
}

std::vector<TreeCheck> check_random_trees(const std::vector<std::uint64_t>& seeds) {
  std::vector<TreeCheck> out(seeds.size());
  parallel_for(seeds.size(), [&](std::size_t i) { out[i] = check_tree(seeds[i]); });
  return out;
}

std::vector<TreeCheck> check_random_trees_serial(const std::vector<std::uint64_t>& seeds) {
  std::vector<TreeCheck> out;
  out.reserve(seeds.size());
  for (auto s : seeds) out.push_back(check_tree(s));
  return out;
}

} // namespace burstpace::sweep
