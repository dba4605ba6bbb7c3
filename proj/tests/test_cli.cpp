#include "burstpace/cli.hpp"
#include "burstpace/format.hpp"

#include "doctest.h"
#include "support.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

using namespace burstpace;
using namespace test_support;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

bool has_line(const std::string& text, const std::string& line) {
  return ("\n" + text).find("\n" + line + "\n") != std::string::npos;
}

std::string value_of(const std::string& text, const std::string& key) {
  std::istringstream ss(text);
  std::string line;
  while (std::getline(ss, line))
    if (line.rfind(key + "=", 0) == 0) return line.substr(key.size() + 1);
  return {};
}

} // namespace

TEST_CASE("plan") {
  auto r = cli({"plan", kFixtures + "/scenario1_decentralized.topo", "--tsom-round", "0.002"});
  CHECK(r.code == 0);
  CHECK(has_line(r.out, "best_interval=0.158"));
  CHECK(has_line(r.out, "queue.R0=25"));
  CHECK(has_line(r.out, "chosen=R0"));
  CHECK(has_line(r.out, "overlap_space=1"));
  CHECK(has_line(r.out, "gaps=1"));

  auto c = cli({"plan", kFixtures + "/scenario1_centralized.topo", "--tsom-round", "0.002"});
  CHECK(has_line(c.out, "best_interval=0.162"));
  CHECK(has_line(c.out, "local_services=20"));

  auto csv = cli({"plan", kFixtures + "/scenario1_decentralized.topo", "--format", "csv"});
  CHECK(csv.code == 0);
  auto lines = split(csv.out, '\n');
  REQUIRE(lines.size() >= 2);
  CHECK(split(lines[0], ',').size() == split(lines[1], ',').size());
}

TEST_CASE("plan errors") {
  auto r = cli({"plan", "/nonexistent.topo"});
  CHECK(r.code == 1);
  CHECK(r.err.find("cannot open") != std::string::npos);
  CHECK(cli({}).code == 2);
  CHECK(cli({"plan"}).code == 2);
  CHECK(cli({"frobnicate"}).code == 2);
  CHECK(cli({"plan", kFixtures + "/colocated.topo", "--message-bytes", "-5"}).code == 2);
  CHECK(cli({"--help"}).code == 0);
}

TEST_CASE("simulate") {
  auto paced = cli({"simulate", kFixtures + "/chain6_two_clients.topo", "--protocol", "paced", "--queue-from-plan"});
  CHECK(paced.code == 0);
  CHECK(has_line(paced.out, "dropped=0"));
  CHECK(has_line(paced.out, "replies_sent=40"));

  auto burst = cli({"simulate", kFixtures + "/chain6_two_clients.topo", "--interval", "0"});
  CHECK(std::stoull(value_of(burst.out, "dropped")) > 0);

  auto ml = cli({"simulate", kFixtures + "/chain6_two_clients.topo", "--protocol", "maxlimit", "--timeout", "0.02"});
  CHECK(ml.code == 0);
  CHECK(std::stoull(value_of(ml.out, "multicast_rounds")) >= 3);

  auto fixed = cli({"simulate", kFixtures + "/two_routers.topo", "--queue", "0", "--interval", "0"});
  CHECK(fixed.code == 0);

  auto rounded = cli({"simulate", kFixtures + "/scenario1_decentralized.topo", "--tsom-round", "0.002", "--round", "3",
                      "--format", "csv"});
  CHECK(rounded.code == 0);
  CHECK(split(split(rounded.out, '\n')[1], ',')[5] == "3.24");
}

TEST_CASE("simulate writes a trace and takes back-traffic") {
  const std::string path = "cli_trace_test.tsv";
  auto r = cli({"simulate", kFixtures + "/scenario1_decentralized.topo", "--tsom-round", "0.002", "--back-traffic",
                "S00:C08:20:0.158", "--back-traffic", "S60:C16:20:0.158", "--trace", path});
  CHECK(r.code == 0);
  CHECK(has_line(r.out, "back_traffic_sent=40"));
  std::ifstream f(path);
  std::string first;
  std::getline(f, first);
  CHECK(split(first, '\t').size() == 6);
  f.close();
  std::remove(path.c_str());
}

TEST_CASE("simulate usage errors") {
  const std::string f = kFixtures + "/chain6_two_clients.topo";
  CHECK(cli({"simulate", f, "--protocol", "maxlimit"}).code == 2);
  CHECK(cli({"simulate", f, "--protocol", "maxlimit", "--timeout", "0.1", "--interval", "0.1"}).code == 2);
  CHECK(cli({"simulate", f, "--timeout", "0.1"}).code == 2);
  CHECK(cli({"simulate", f, "--protocol", "bogus"}).code == 2);
  CHECK(cli({"simulate", f, "--queue", "3", "--queue-from-plan"}).code == 2);
  CHECK(cli({"simulate", f, "--back-traffic", "nonsense"}).code == 1);
}

TEST_CASE("oracle") {
  auto r = cli({"oracle", kFixtures + "/scenario1_decentralized.topo", "--tsom-round", "0.002"});
  CHECK(r.code == 0);
  CHECK(std::stod(value_of(r.out, "oracle_interval")) <= 0.158);
  CHECK(std::stod(value_of(r.out, "ratio")) <= 1.0);
  auto serial = cli({"oracle", kFixtures + "/scenario1_decentralized.topo", "--tsom-round", "0.002", "--serial"});
  CHECK(serial.out == r.out);
  auto co = cli({"oracle", kFixtures + "/colocated.topo"});
  CHECK(has_line(co.out, "oracle_interval=0"));
}

TEST_CASE("table1") {
  auto r = cli({"table1", "--output", "csv"});
  CHECK(r.code == 0);
  auto lines = split(r.out, '\n');
  CHECK(lines.size() == 32); // header, 30 cells, trailing newline
  auto one = cli({"table1", "--routers", "8", "--per-router", "1", "--output", "csv"});
  CHECK(one.out == "per_router,routers,network_size,interval_tsom\n1,8,16,5\n");
  CHECK(cli({"table1", "--per-router", "0"}).code == 2);
  CHECK(cli({"table1", "--routers", "x"}).code == 2);
  auto text = cli({"table1"});
  CHECK(text.out.find("TSoM * 69") != std::string::npos);
}

TEST_CASE("compare and analyze") {
  auto r = cli({"compare", kFixtures + "/chain6_two_clients.topo", "--round", "3"});
  CHECK(r.code == 0);
  CHECK(r.out.find("maxlimit 0.15") != std::string::npos);
  CHECK(cli({"compare", kFixtures + "/chain6_two_clients.topo", "--timeouts", "0"}).code == 2);

  auto a = cli({"analyze", "--sent", "10", "--incoming-rate", "5", "--processing-rate", "0", "--queue", "4"});
  CHECK(a.code == 0);
  CHECK(has_line(a.out, "will_drop=true"));
  CHECK(has_line(a.out, "safe_receive_time=unsatisfiable"));
  CHECK(cli({"analyze", "--sent", "10", "--incoming-rate", "0", "--processing-rate", "1", "--queue", "4"}).code == 2);
}

TEST_CASE("output is deterministic") {
  const std::vector<std::string> args{"compare", kFixtures + "/star7_two_clients.topo"};
  CHECK(cli(args).out == cli(args).out);
}
