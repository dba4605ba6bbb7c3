// Serial reference against the OpenMP kernels on the same workloads.

#include "burstpace/protocols.hpp"
#include "burstpace/sweep.hpp"

#include <chrono>
#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <numeric>

#include <omp.h>

using namespace burstpace;

template <class Fn> double seconds(Fn&& fn) {
  auto t0 = std::chrono::steady_clock::now();
  fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

static void report(const char* name, double serial, double parallel, bool same) {
  std::cout << std::left << std::setw(28) << name << std::right << std::fixed << std::setprecision(4) << std::setw(10)
            << serial << std::setw(10) << parallel << std::setw(9) << std::setprecision(2) << serial / parallel << "x"
            << (same ? "" : "  MISMATCH") << '\n';
}

int main(int argc, char** argv) {
  const std::string fixtures = argc > 1 ? argv[1] : "fixtures";
  const Topology t = load_topology(fixtures + "/scenario1_decentralized.topo");
  const MessageParams p = default_message_params(t);
  const Plan pl = plan(t, p);
  const auto grid = protocols::oracle_grid(t, p);

  std::vector<double> intervals;
  for (std::size_t k = 0; k < 400; ++k) intervals.push_back(static_cast<double>(k) * grid.step_s);
  std::vector<std::uint64_t> seeds(200);
  std::iota(seeds.begin(), seeds.end(), 1);

  std::cout << "threads " << omp_get_max_threads() << "\n";
  std::cout << std::left << std::setw(28) << "kernel" << std::right << std::setw(10) << "serial" << std::setw(10)
            << "parallel" << std::setw(10) << "speedup" << '\n';

  std::vector<std::uint64_t> a, b;
  double ts = seconds([&] { a = sweep::drops_over_intervals_serial(t, pl.queue_sizes, intervals, p.message_bytes); });
  double tp = seconds([&] { b = sweep::drops_over_intervals(t, pl.queue_sizes, intervals, p.message_bytes); });
  report("drops over 400 intervals", ts, tp, a == b);

  std::optional<double> oa, ob;
  ts = seconds([&] { oa = protocols::min_zero_drop_interval(t, pl.queue_sizes, p); });
  tp = seconds([&] { ob = sweep::min_zero_drop_interval_scan(t, pl.queue_sizes, p); });
  report("oracle bisect vs scan", ts, tp, oa == ob);

  std::vector<sweep::TreeCheck> ra, rb;
  ts = seconds([&] { ra = sweep::check_random_trees_serial(seeds); });
  tp = seconds([&] { rb = sweep::check_random_trees(seeds); });
  bool same = ra.size() == rb.size();
  for (std::size_t i = 0; same && i < ra.size(); ++i)
    same = ra[i].planned_drops == rb[i].planned_drops && ra[i].oracle_s == rb[i].oracle_s;
  report("200 random trees", ts, tp, same);
  return EXIT_SUCCESS;
}
