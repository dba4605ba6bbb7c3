#include "burstpace/cli.hpp"

#include "burstpace/format.hpp"
#include "burstpace/planner.hpp"
#include "burstpace/protocols.hpp"
#include "burstpace/queue_analysis.hpp"
#include "burstpace/simulator.hpp"
#include "burstpace/sweep.hpp"
#include "burstpace/topology.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

namespace burstpace {

namespace {

class UsageError : public Error {
public:
  using Error::Error;
};

struct ParamFlags {
  std::optional<std::uint32_t> message_bytes;
  std::optional<double> bandwidth_bps;
  std::optional<double> tsom_round;

  void attach(CLI::App* app) {
    app->add_option("--message-bytes", message_bytes, "Message size (default: mean service size)")
        ->check(CLI::PositiveNumber);
    app->add_option("--bandwidth-bps", bandwidth_bps, "Link bandwidth (default: mean link bandwidth)")
        ->check(CLI::PositiveNumber);
    app->add_option("--tsom-round", tsom_round, "Round message times up to this step in seconds")
        ->check(CLI::PositiveNumber);
  }

  MessageParams params(const Topology& t) const {
    MessageParams p = default_message_params(t, tsom_round);
    if (message_bytes) p.message_bytes = *message_bytes;
    if (bandwidth_bps) p.bandwidth_bps = *bandwidth_bps;
    return p;
  }
};

struct DisplayFlags {
  std::string format = "text";
  std::optional<int> round;

  void attach(CLI::App* app) {
    app->add_option("--format", format, "Output format")->check(CLI::IsMember({"text", "csv"}));
    app->add_option("--round", round, "Decimal places for displayed times")->check(CLI::Range(0, 17));
  }
};

std::vector<std::size_t> parse_counts(const std::string& text, const char* what) {
  std::vector<std::size_t> out;
  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size() || v < 0) throw UsageError(std::string("invalid ") + what + " '" + text + "'");
    return static_cast<std::size_t>(v);
  };
  for (const auto& part : split(text, ',')) {
    if (auto dots = part.find(".."); dots != std::string::npos) {
      std::size_t lo = number(part.substr(0, dots)), hi = number(part.substr(dots + 2));
      if (lo > hi) throw UsageError(std::string("empty range in ") + what + " '" + text + "'");
      for (std::size_t v = lo; v <= hi; ++v) out.push_back(v);
    } else {
      out.push_back(number(part));
    }
  }
  for (std::size_t v : out)
    if (v == 0) throw UsageError(std::string(what) + " must be at least 1");
  return out;
}

std::vector<double> parse_times(const std::string& text) {
  std::vector<double> out;
  for (const auto& part : split(text, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(part, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != part.size() || !(v > 0.0)) throw UsageError("invalid timeout list '" + text + "'");
    out.push_back(v);
  }
  return out;
}

void write_plan(const Plan& p, std::ostream& out, std::optional<int> decimals) {
  out << "configuration=" << (p.centralized ? "centralized" : "decentralized") << '\n';
  for (const auto& [router, size] : p.queue_sizes) out << "queue." << router << '=' << size << '\n';
  out << "candidates=" << join(p.candidates, ",") << '\n' << "chosen=" << p.chosen << '\n' << "large=" << p.large << '\n';
  if (p.centralized)
    out << "local_services=" << p.local_services << '\n';
  else
    out << "overlap_space=" << p.overlap_space << '\n';
  out << "gaps=" << p.gap_slots << '\n'
      << "tsom=" << format_number(p.tsom_s, decimals) << '\n'
      << "max_message_time=" << format_number(p.max_message_time_s, decimals) << '\n';
  if (p.root_fill_time_s) out << "root_fill_time=" << format_number(*p.root_fill_time_s, decimals) << '\n';
  out << "best_interval=" << format_number(p.best_interval_s, decimals) << '\n'
      << "best_interval_tsom=" << format_number(p.interval_in_tsom(), decimals) << '\n';
}

void write_plan_csv(const Plan& p, std::ostream& out, std::optional<int> decimals) {
  std::vector<std::string> queues;
  for (const auto& [router, size] : p.queue_sizes) queues.push_back(router + ":" + std::to_string(size));
  out << "configuration,chosen,candidates,large,overlap_space,local_services,gaps,tsom_s,max_message_time_s,"
         "best_interval_s,best_interval_tsom,queue_sizes\n"
      << (p.centralized ? "centralized" : "decentralized") << ',' << p.chosen << ',' << join(p.candidates, ";") << ','
      << p.large << ',' << p.overlap_space << ',' << p.local_services << ',' << p.gap_slots << ','
      << format_number(p.tsom_s, decimals) << ',' << format_number(p.max_message_time_s, decimals) << ','
      << format_number(p.best_interval_s, decimals) << ',' << format_number(p.interval_in_tsom(), decimals) << ','
      << join(queues, ";") << '\n';
}

QueueSizes uniform_queues(const Topology& t, std::size_t size) {
  QueueSizes q;
  for (const auto& r : t.routers()) q[r] = size;
  return q;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Burst pacing planner and drop-tail network simulator", "burstpace"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  // plan
  std::string plan_path;
  ParamFlags plan_params;
  DisplayFlags plan_display;
  auto* plan_cmd = app.add_subcommand("plan", "Queue sizes, candidate routers and the best interval");
  plan_cmd->add_option("topology", plan_path, "Topology file")->required();
  plan_params.attach(plan_cmd);
  plan_display.attach(plan_cmd);

  // analyze
  std::uint64_t an_sent = 0, an_queue = 0;
  double an_in = 0.0, an_pr = 0.0;
  std::optional<int> an_round;
  auto* analyze_cmd = app.add_subcommand("analyze", "Receiver-side burst analysis");
  analyze_cmd->add_option("--sent", an_sent, "Messages in the burst")->required();
  analyze_cmd->add_option("--incoming-rate", an_in, "Arrival rate in msg/s")->required()->check(CLI::PositiveNumber);
  analyze_cmd->add_option("--processing-rate", an_pr, "Processing rate in msg/s")->required()->check(CLI::NonNegativeNumber);
  analyze_cmd->add_option("--queue", an_queue, "Receiver queue size")->required();
  analyze_cmd->add_option("--round", an_round, "Decimal places for displayed times")->check(CLI::Range(0, 17));

  // simulate
  std::string sim_path, sim_protocol = "paced", sim_trace;
  std::optional<double> sim_interval, sim_timeout;
  std::optional<std::size_t> sim_queue, sim_edge;
  std::vector<std::string> sim_back;
  std::size_t sim_cap = 64;
  ParamFlags sim_params;
  DisplayFlags sim_display;
  auto* sim_cmd = app.add_subcommand("simulate", "Run paced or maximum-limit discovery");
  sim_cmd->add_option("topology", sim_path, "Topology file")->required();
  sim_cmd->add_option("--protocol", sim_protocol, "Discovery protocol")->check(CLI::IsMember({"paced", "maxlimit"}));
  sim_cmd->add_option("--interval", sim_interval, "Paced interval in seconds (default: planned)")
      ->check(CLI::NonNegativeNumber);
  sim_cmd->add_option("--timeout", sim_timeout, "Maximum-limit timeout in seconds")->check(CLI::PositiveNumber);
  auto* from_plan = sim_cmd->add_flag("--queue-from-plan", "Use the planned queue sizes (default)");
  auto* fixed_queue = sim_cmd->add_option("--queue", sim_queue, "Same queue size at every router");
  from_plan->excludes(fixed_queue);
  sim_cmd->add_option("--edge-queue", sim_edge, "Capacity of router-to-end-node queues (default: unbounded)");
  sim_cmd->add_option("--back-traffic", sim_back, "SERVICE:CLIENT:COUNT:PERIOD, repeatable");
  sim_cmd->add_option("--trace", sim_trace, "Write the event trace to this file");
  sim_cmd->add_option("--round-cap", sim_cap, "Maximum-limit round limit")->check(CLI::PositiveNumber);
  sim_params.attach(sim_cmd);
  sim_display.attach(sim_cmd);

  // oracle
  std::string or_path;
  std::optional<std::size_t> or_queue;
  bool or_serial = false;
  ParamFlags or_params;
  std::optional<int> or_round;
  auto* oracle_cmd = app.add_subcommand("oracle", "Smallest zero-drop interval found by simulation");
  oracle_cmd->add_option("topology", or_path, "Topology file")->required();
  auto* or_from_plan = oracle_cmd->add_flag("--queue-from-plan", "Use the planned queue sizes (default)");
  auto* or_fixed = oracle_cmd->add_option("--queue", or_queue, "Same queue size at every router");
  or_from_plan->excludes(or_fixed);
  oracle_cmd->add_flag("--serial", or_serial, "Bisect serially instead of scanning the grid in parallel");
  or_params.attach(oracle_cmd);
  oracle_cmd->add_option("--round", or_round, "Decimal places for displayed times")->check(CLI::Range(0, 17));

  // table1
  std::string t1_routers = "8,12,16", t1_per = "1..10", t1_output = "text";
  std::uint32_t t1_bytes = 128;
  double t1_bw = 524288.0;
  std::optional<double> t1_step;
  auto* table_cmd = app.add_subcommand("table1", "Best interval in TSoM units for router chains");
  table_cmd->add_option("--routers", t1_routers, "Router counts, e.g. 8,12,16 or 2..6");
  table_cmd->add_option("--per-router", t1_per, "Clients and services per router, e.g. 1..10");
  table_cmd->add_option("--output", t1_output, "Output format")->check(CLI::IsMember({"text", "csv"}));
  table_cmd->add_option("--message-bytes", t1_bytes, "Message size")->check(CLI::PositiveNumber);
  table_cmd->add_option("--bandwidth-bps", t1_bw, "Link bandwidth")->check(CLI::PositiveNumber);
  table_cmd->add_option("--tsom-round", t1_step, "Round message times up to this step")->check(CLI::PositiveNumber);

  // compare
  std::string cmp_path, cmp_timeouts = "0.15,0.1,0.05";
  ParamFlags cmp_params;
  DisplayFlags cmp_display;
  auto* compare_cmd = app.add_subcommand("compare", "Paced discovery against the maximum-limit method");
  compare_cmd->add_option("topology", cmp_path, "Topology file")->required();
  compare_cmd->add_option("--timeouts", cmp_timeouts, "Comma-separated maximum-limit timeouts");
  cmp_params.attach(compare_cmd);
  cmp_display.attach(compare_cmd);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (*plan_cmd) {
      const Topology t = load_topology(plan_path);
      const Plan p = plan(t, plan_params.params(t));
      if (plan_display.format == "csv")
        write_plan_csv(p, out, plan_display.round);
      else
        write_plan(p, out, plan_display.round);
    } else if (*analyze_cmd) {
      namespace qa = queue_analysis;
      const qa::Case c{an_sent, an_in, an_pr, an_queue};
      const double rt = qa::receive_time(c);
      const auto processed = qa::processed_within(rt, an_pr);
      const auto safe = qa::safe_receive_time(an_sent, an_queue, an_pr);
      out << "receive_time=" << format_number(rt, an_round) << '\n'
          << "processed=" << std::min<std::uint64_t>(processed, an_sent) << '\n'
          << "will_drop=" << (qa::will_drop(an_sent, rt, an_pr, an_queue) ? "true" : "false") << '\n'
          << "min_queue_size=" << qa::min_queue_size(an_sent, rt, an_pr) << '\n'
          << "safe_receive_time=" << (safe ? format_number(*safe, an_round) : std::string("unsatisfiable")) << '\n';
    } else if (*sim_cmd) {
      const bool paced = sim_protocol == "paced";
      if (paced && sim_timeout) throw UsageError("--timeout applies to --protocol maxlimit");
      if (!paced && sim_interval) throw UsageError("--interval applies to --protocol paced");
      if (!paced && !sim_back.empty()) throw UsageError("--back-traffic applies to --protocol paced");
      if (!paced && !sim_timeout) throw UsageError("--protocol maxlimit requires --timeout");
      const Topology t = load_topology(sim_path);
      const MessageParams params = sim_params.params(t);
      std::optional<Plan> p;
      if (!sim_queue || (paced && !sim_interval)) p = plan(t, params);
      const QueueSizes queues = sim_queue ? uniform_queues(t, *sim_queue) : p->queue_sizes;

      sim::SimTrace trace;
      protocols::RunOptions ro;
      ro.edge_queue_capacity = sim_edge;
      if (!sim_trace.empty()) ro.trace = &trace;
      protocols::ScenarioMetrics m;
      if (paced) {
        protocols::PacedDiscoveryConfig cfg;
        cfg.interval_s = sim_interval ? *sim_interval : p->best_interval_s;
        cfg.reply_bytes = cfg.query_bytes = params.message_bytes;
        for (const auto& spec : sim_back) cfg.back_traffic.push_back(protocols::parse_back_traffic(spec));
        m = protocols::run_paced(t, queues, cfg, ro);
      } else {
        protocols::MaxLimitDiscoveryConfig cfg;
        cfg.timeout_s = *sim_timeout;
        cfg.reply_bytes = cfg.query_bytes = params.message_bytes;
        cfg.round_cap = sim_cap;
        m = protocols::run_max_limit(t, cfg, queues, ro);
      }
      if (!sim_trace.empty()) {
        std::ofstream f(sim_trace);
        if (!f) throw Error("cannot write trace file '" + sim_trace + "'");
        sim::write_trace(trace, f);
      }
      if (sim_display.format == "csv")
        out << protocols::metrics_csv_header() << '\n' << protocols::metrics_csv_row(sim_protocol, m, sim_display.round) << '\n';
      else
        protocols::write_metrics(m, out, sim_display.round);
    } else if (*oracle_cmd) {
      const Topology t = load_topology(or_path);
      const MessageParams params = or_params.params(t);
      const Plan p = plan(t, params);
      const QueueSizes queues = or_queue ? uniform_queues(t, *or_queue) : p.queue_sizes;
      const auto oracle = or_serial ? protocols::min_zero_drop_interval(t, queues, params)
                                    : sweep::min_zero_drop_interval_scan(t, queues, params);
      out << "oracle_interval=" << (oracle ? format_number(*oracle, or_round) : std::string("none")) << '\n'
          << "best_interval=" << format_number(p.best_interval_s, or_round) << '\n';
      if (oracle && p.best_interval_s > 0.0)
        out << "ratio=" << format_number(*oracle / p.best_interval_s, or_round) << '\n';
      else if (oracle && *oracle == 0.0)
        out << "ratio=0\n";
      else
        out << "ratio=none\n";
    } else if (*table_cmd) {
      const auto routers = parse_counts(t1_routers, "router count");
      const auto per = parse_counts(t1_per, "per-router count");
      const MessageParams params{t1_bytes, t1_bw, t1_step};
      const auto cells = interval_table(routers, per, params);
      if (t1_output == "csv") {
        out << "per_router,routers,network_size,interval_tsom\n";
        for (const auto& c : cells)
          out << c.per_router << ',' << c.routers << ',' << c.network_size << ',' << format_number(c.interval_tsom) << '\n';
      } else {
        std::vector<std::string> header{"per router"};
        for (auto r : routers) header.push_back(std::to_string(r) + " routers");
        header.push_back("network size");
        std::vector<std::vector<std::string>> rows{header};
        for (std::size_t i = 0; i < per.size(); ++i) {
          std::vector<std::string> row{std::to_string(per[i]) + " client & " + std::to_string(per[i]) + " service"};
          for (std::size_t j = 0; j < routers.size(); ++j)
            row.push_back("TSoM * " + format_number(cells[i * routers.size() + j].interval_tsom));
          row.push_back(std::to_string(2 * per[i]) + " * router No.");
          rows.push_back(std::move(row));
        }
        std::vector<std::size_t> w(header.size(), 0);
        for (const auto& r : rows)
          for (std::size_t j = 0; j < r.size(); ++j) w[j] = std::max(w[j], r[j].size());
        for (const auto& r : rows) {
          std::ostringstream line;
          for (std::size_t j = 0; j < r.size(); ++j)
            line << (j ? "  " : "") << std::left << std::setw(static_cast<int>(w[j])) << r[j];
          std::string s = line.str();
          s.erase(s.find_last_not_of(' ') + 1);
          out << s << '\n';
        }
      }
    } else if (*compare_cmd) {
      const auto timeouts = parse_times(cmp_timeouts);
      const Topology t = load_topology(cmp_path);
      const MessageParams params = cmp_params.params(t);
      const Plan p = plan(t, params);
      const auto cols = protocols::compare(t, p, timeouts, params.message_bytes);
      if (cmp_display.format == "csv") {
        out << protocols::metrics_csv_header() << '\n';
        for (const auto& c : cols) out << protocols::metrics_csv_row(c.label, c.metrics, cmp_display.round) << '\n';
      } else {
        protocols::write_comparison(cols, out, cmp_display.round);
      }
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

} // namespace burstpace
