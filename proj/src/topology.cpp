#include "burstpace/topology.hpp"

#include "burstpace/format.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <map>
#include <queue>
#include <set>
#include <sstream>
#include <tuple>

namespace burstpace {

namespace {

constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> tokens;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) tokens.push_back(tok);
  return tokens;
}

double parse_number(const std::string& tok, std::size_t line, const char* what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != tok.size()) throw ParseError(line, std::string("invalid ") + what + " '" + tok + "'");
  return v;
}

} // namespace

ParseError::ParseError(std::size_t line, const std::string& what)
    : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

Topology::Topology(Configuration config, std::vector<std::string> routers,
                   std::vector<EndNode> end_nodes, std::vector<Link> links)
    : config_(std::move(config)), routers_(std::move(routers)), end_nodes_(std::move(end_nodes)),
      links_(std::move(links)) {
  std::sort(routers_.begin(), routers_.end());
  std::sort(end_nodes_.begin(), end_nodes_.end(),
            [](const EndNode& x, const EndNode& y) { return x.id < y.id; });
  validate_and_index();
}

std::optional<std::size_t> Topology::find(const std::string& id) const {
  auto r = std::lower_bound(routers_.begin(), routers_.end(), id);
  if (r != routers_.end() && *r == id) return static_cast<std::size_t>(r - routers_.begin());
  auto e = std::lower_bound(end_nodes_.begin(), end_nodes_.end(), id,
                            [](const EndNode& n, const std::string& v) { return n.id < v; });
  if (e != end_nodes_.end() && e->id == id)
    return routers_.size() + static_cast<std::size_t>(e - end_nodes_.begin());
  return std::nullopt;
}

std::size_t Topology::index_of(const std::string& id) const {
  auto i = find(id);
  if (!i) throw Error("unknown node '" + id + "'");
  return *i;
}

const std::string& Topology::name_of(std::size_t node) const {
  return is_router(node) ? routers_.at(node) : end_node(node).id;
}

std::size_t Topology::attachment(std::size_t node) const {
  return is_router(node) ? node : *find(end_node(node).router);
}

std::size_t Topology::next_hop(std::size_t from, std::size_t to) const {
  if (from == to) return from;
  if (!is_router(from)) return attachment(from);
  std::size_t target_router = attachment(to);
  if (target_router == from) return to;
  return next_router_[from * routers_.size() + target_router];
}

std::size_t Topology::link_between(std::size_t a, std::size_t b) const {
  std::size_t idx = link_index_.at(a * node_count() + b);
  if (idx == npos) throw Error("no link between '" + name_of(a) + "' and '" + name_of(b) + "'");
  return idx;
}

bool Topology::branch_has_services(std::size_t router, std::size_t next) const {
  return branch_services_.at(router * node_count() + next) != 0;
}

bool Topology::operator==(const Topology& o) const {
  if (config_ != o.config_ || routers_ != o.routers_ || end_nodes_ != o.end_nodes_) return false;
  if (links_.size() != o.links_.size()) return false;
  auto key = [](const Link& l) {
    return l.a < l.b ? std::tie(l.a, l.b) : std::tie(l.b, l.a);
  };
  auto sorted = [&](const std::vector<Link>& ls) {
    std::vector<const Link*> v;
    for (const auto& l : ls) v.push_back(&l);
    std::sort(v.begin(), v.end(), [&](const Link* x, const Link* y) { return key(*x) < key(*y); });
    return v;
  };
  auto a = sorted(links_), b = sorted(o.links_);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (key(*a[i]) != key(*b[i]) || a[i]->bandwidth_bps != b[i]->bandwidth_bps ||
        a[i]->delay_s != b[i]->delay_s)
      return false;
  }
  return true;
}

void Topology::validate_and_index() {
  const std::size_t R = routers_.size();
  if (R == 0) throw ParseError(0, "topology has no routers");

  std::set<std::string> ids;
  for (const auto& r : routers_)
    if (!ids.insert(r).second) throw ParseError(0, "duplicate id '" + r + "'");
  for (const auto& e : end_nodes_) {
    if (!ids.insert(e.id).second) throw ParseError(0, "duplicate id '" + e.id + "'");
    if (!std::binary_search(routers_.begin(), routers_.end(), e.router))
      throw ParseError(0, "end node '" + e.id + "' attached to unknown router '" + e.router + "'");
    if (e.kind == EndKind::Service && e.message_bytes == 0)
      throw ParseError(0, "service '" + e.id + "' must have positive message_bytes");
  }

  const std::size_t N = node_count();
  link_index_.assign(N * N, npos);
  adj_.assign(N, {});
  router_adj_.assign(R, {});
  attached_.assign(R, {});
  clients_at_.assign(R, 0);
  services_at_.assign(R, 0);

  for (std::size_t i = 0; i < links_.size(); ++i) {
    const Link& l = links_[i];
    auto a = find(l.a), b = find(l.b);
    if (!a) throw ParseError(0, "link endpoint '" + l.a + "' is unknown");
    if (!b) throw ParseError(0, "link endpoint '" + l.b + "' is unknown");
    if (*a == *b) throw ParseError(0, "self link on '" + l.a + "'");
    if (!(l.bandwidth_bps > 0.0)) throw ParseError(0, "link " + l.a + "-" + l.b + " needs bandwidth > 0");
    if (!(l.delay_s >= 0.0)) throw ParseError(0, "link " + l.a + "-" + l.b + " needs delay >= 0");
    if (link_index_[*a * N + *b] != npos)
      throw ParseError(0, "duplicate link between '" + l.a + "' and '" + l.b + "'");
    if (!is_router(*a) && !is_router(*b))
      throw ParseError(0, "link " + l.a + "-" + l.b + " joins two end nodes");
    for (auto [end, other] : {std::pair{*a, *b}, std::pair{*b, *a}}) {
      if (!is_router(end) && end_node(end).router != routers_[other])
        throw ParseError(0, "end node '" + name_of(end) + "' must link to its router '" +
                                end_node(end).router + "'");
    }
    link_index_[*a * N + *b] = i;
    link_index_[*b * N + *a] = i;
    adj_[*a].push_back(*b);
    adj_[*b].push_back(*a);
    if (is_router(*a) && is_router(*b)) {
      router_adj_[*a].push_back(*b);
      router_adj_[*b].push_back(*a);
    }
  }
  for (auto& v : adj_) std::sort(v.begin(), v.end());
  for (auto& v : router_adj_) std::sort(v.begin(), v.end());

  for (std::size_t k = 0; k < end_nodes_.size(); ++k) {
    const auto& e = end_nodes_[k];
    std::size_t node = R + k;
    std::size_t r = *find(e.router);
    if (adj_[node].size() != 1) throw ParseError(0, "end node '" + e.id + "' needs exactly one access link");
    attached_[r].push_back(node);
    if (e.kind == EndKind::Client) {
      ++clients_at_[r];
      ++total_clients_;
    } else {
      ++services_at_[r];
      ++total_services_;
    }
  }

  // All-pairs router hops and next hops by BFS from every router.
  hops_.assign(R * R, npos);
  next_router_.assign(R * R, npos);
  for (std::size_t s = 0; s < R; ++s) {
    std::queue<std::size_t> q;
    hops_[s * R + s] = 0;
    q.push(s);
    while (!q.empty()) {
      std::size_t u = q.front();
      q.pop();
      for (std::size_t v : router_adj_[u]) {
        if (hops_[s * R + v] != npos) continue;
        hops_[s * R + v] = hops_[s * R + u] + 1;
        next_router_[s * R + v] = (u == s) ? v : next_router_[s * R + u];
        q.push(v);
      }
    }
  }
  for (std::size_t i = 0; i < R * R; ++i)
    if (hops_[i] == npos) throw ParseError(0, "router graph is not connected");

  std::size_t router_edges = 0;
  for (const auto& v : router_adj_) router_edges += v.size();
  router_edges /= 2;

  if (config_.centralized) {
    auto root = find(config_.root);
    if (!root || !is_router(*root)) throw ParseError(0, "centralized root '" + config_.root + "' is not a router");
    if (!attached_[*root].empty()) throw ParseError(0, "root must have no end nodes");
    for (std::size_t r = 0; r < R; ++r) {
      if (r == *root) continue;
      if (router_adj_[r].size() != 1 || router_adj_[r][0] != *root)
        throw ParseError(0, "router '" + routers_[r] + "' must have exactly one link, to the root");
    }
  } else {
    if (!config_.root.empty()) throw ParseError(0, "decentralized configuration cannot name a root");
    if (router_edges != R - 1) throw ParseError(0, "decentralized router graph must be a tree (cycle found)");
  }

  // For every (router, neighbour) pair, count services reachable through
  // the neighbour without passing back through the router.
  branch_services_.assign(R * N, 0);
  for (std::size_t r = 0; r < R; ++r) {
    for (std::size_t nb : adj_[r]) {
      if (!is_router(nb)) {
        branch_services_[r * N + nb] = end_node(nb).kind == EndKind::Service;
        continue;
      }
      std::size_t count = 0;
      for (std::size_t x = 0; x < R; ++x)
        if (x != r && hops(x, nb) < hops(x, r)) count += services_at_[x];
      branch_services_[r * N + nb] = count > 0;
    }
  }
}

Topology parse_topology(std::istream& in) {
  Configuration config;
  bool have_config = false;
  std::vector<std::string> routers;
  std::vector<EndNode> ends;
  std::vector<Link> links;
  std::map<std::string, std::size_t> decl_line;

  auto declare = [&](const std::string& id, std::size_t line) {
    if (!decl_line.emplace(id, line).second) throw ParseError(line, "duplicate id '" + id + "'");
  };

  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    auto tok = tokenize(raw);
    if (tok.empty()) continue;
    const std::string& kw = tok[0];
    if (!have_config && kw != "config") throw ParseError(line_no, "first declaration must be 'config'");
    if (kw == "config") {
      if (have_config) throw ParseError(line_no, "configuration declared twice");
      if (tok.size() == 2 && tok[1] == "decentralized") {
        config = {};
      } else if (tok.size() == 4 && tok[1] == "centralized" && tok[2] == "root") {
        config = {true, tok[3]};
      } else {
        throw ParseError(line_no, "expected 'config decentralized' or 'config centralized root <id>'");
      }
      have_config = true;
    } else if (kw == "router") {
      if (tok.size() != 2) throw ParseError(line_no, "expected 'router <id>'");
      declare(tok[1], line_no);
      routers.push_back(tok[1]);
    } else if (kw == "link") {
      if (tok.size() != 5) throw ParseError(line_no, "expected 'link <a> <b> <bandwidth_bps> <delay_s>'");
      double bw = parse_number(tok[3], line_no, "bandwidth");
      double delay = parse_number(tok[4], line_no, "delay");
      if (!(bw > 0.0)) throw ParseError(line_no, "bandwidth must be positive");
      if (!(delay >= 0.0)) throw ParseError(line_no, "delay must be non-negative");
      links.push_back({tok[1], tok[2], bw, delay});
      decl_line.emplace("#link" + std::to_string(links.size() - 1), line_no);
    } else if (kw == "client") {
      if (tok.size() != 3) throw ParseError(line_no, "expected 'client <id> <router>'");
      declare(tok[1], line_no);
      ends.push_back({tok[1], EndKind::Client, tok[2], 0});
    } else if (kw == "service") {
      if (tok.size() != 4) throw ParseError(line_no, "expected 'service <id> <router> <message_bytes>'");
      declare(tok[1], line_no);
      double bytes = parse_number(tok[3], line_no, "message_bytes");
      if (!(bytes >= 1.0) || bytes != static_cast<double>(static_cast<std::uint32_t>(bytes)))
        throw ParseError(line_no, "message_bytes must be a positive integer");
      ends.push_back({tok[1], EndKind::Service, tok[2], static_cast<std::uint32_t>(bytes)});
    } else {
      throw ParseError(line_no, "unknown declaration '" + kw + "'");
    }
  }
  if (!have_config) throw ParseError(line_no, "missing 'config' declaration");

  // Line-level checks for things the constructor would only report globally.
  for (std::size_t i = 0; i < links.size(); ++i) {
    std::size_t ln = decl_line["#link" + std::to_string(i)];
    for (const auto* id : {&links[i].a, &links[i].b})
      if (!decl_line.count(*id)) throw ParseError(ln, "unknown endpoint '" + *id + "'");
  }
  for (const auto& e : ends) {
    auto it = decl_line.find(e.router);
    if (it == decl_line.end() || std::find(routers.begin(), routers.end(), e.router) == routers.end())
      throw ParseError(decl_line[e.id], "unknown router '" + e.router + "'");
  }

  // Default access links.
  std::set<std::string> has_link;
  for (const auto& l : links) {
    has_link.insert(l.a);
    has_link.insert(l.b);
  }
  for (const auto& e : ends) {
    if (has_link.count(e.id)) continue;
    if (links.empty())
      throw ParseError(decl_line[e.id], "end node '" + e.id + "' has no link and no declared link to copy");
    links.push_back({e.router, e.id, links.front().bandwidth_bps, links.front().delay_s});
  }
  return Topology(std::move(config), std::move(routers), std::move(ends), std::move(links));
}

Topology parse_topology_string(const std::string& text) {
  std::istringstream ss(text);
  return parse_topology(ss);
}

Topology load_topology(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open topology file '" + path + "'");
  return parse_topology(f);
}

void serialize_topology(const Topology& t, std::ostream& out) {
  const auto& c = t.configuration();
  out << (c.centralized ? "config centralized root " + c.root : std::string("config decentralized")) << '\n';
  for (const auto& r : t.routers()) out << "router " << r << '\n';
  for (const auto& l : t.links())
    out << "link " << l.a << ' ' << l.b << ' ' << format_number(l.bandwidth_bps) << ' '
        << format_number(l.delay_s) << '\n';
  for (const auto& e : t.end_nodes()) {
    if (e.kind == EndKind::Client)
      out << "client " << e.id << ' ' << e.router << '\n';
    else
      out << "service " << e.id << ' ' << e.router << ' ' << e.message_bytes << '\n';
  }
}

std::string serialize_topology(const Topology& t) {
  std::ostringstream ss;
  serialize_topology(t, ss);
  return ss.str();
}

ClientServicePath longest_client_service_path(const Topology& t) {
  if (t.total_clients() == 0) throw Error("topology has no client");
  if (t.total_services() == 0) throw Error("topology has no service");
  std::optional<ClientServicePath> best;
  for (const auto& c : t.end_nodes()) {
    if (c.kind != EndKind::Client) continue;
    std::size_t rc = t.index_of(c.router);
    for (const auto& s : t.end_nodes()) {
      if (s.kind != EndKind::Service) continue;
      std::size_t h = t.hops(rc, t.index_of(s.router));
      // end_nodes() is id-sorted, so the first pair reaching a new maximum
      // is the lexicographically smallest one.
      if (!best || h > best->hops) best = ClientServicePath{c.id, s.id, h};
    }
  }
  return *best;
}

SplitParts split_parts(const Topology& t, const std::string& router) {
  auto idx = t.find(router);
  if (!idx || !t.is_router(*idx)) throw Error("unknown router '" + router + "'");
  return split_parts(t, *idx);
}

SplitParts split_parts(const Topology& t, std::size_t router) {
  if (t.centralized()) throw Error("split_parts requires a decentralized topology");
  struct Component {
    std::size_t services = 0;
    std::size_t smallest_router = 0;
    std::size_t neighbor = 0;
  };
  std::vector<Component> comps;
  for (std::size_t nb : t.router_neighbors(router)) {
    Component c{0, nb, nb};
    for (std::size_t x = 0; x < t.router_count(); ++x) {
      if (x == router || t.hops(x, nb) >= t.hops(x, router)) continue;
      c.services += t.services_at(x);
      c.smallest_router = std::min(c.smallest_router, x);
    }
    comps.push_back(c);
  }
  SplitParts out;
  if (comps.empty()) return out;
  auto largest = std::min_element(comps.begin(), comps.end(), [](const Component& a, const Component& b) {
    if (a.services != b.services) return a.services > b.services;
    return a.smallest_router < b.smallest_router;
  });
  out.left_services = largest->services;
  out.left_neighbor = largest->neighbor;
  for (const auto& c : comps)
    if (&c != &*largest) out.right_services += c.services;
  return out;
}

} // namespace burstpace
