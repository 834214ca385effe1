#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "healnet/sim.hpp"

namespace healnet::sim {

using net::NodeKind;

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::fail_link: return "fail_link";
    case EventKind::restore_link: return "restore_link";
    case EventKind::crash_node: return "crash_node";
    case EventKind::restore_node: return "restore_node";
    case EventKind::crash_app: return "crash_app";
    case EventKind::crash_vnf: return "crash_vnf";
    case EventKind::crash_service: return "crash_service";
    case EventKind::misconfigure: return "misconfigure";
    case EventKind::set_metric: return "set_metric";
    case EventKind::set_load: return "set_load";
    case EventKind::set_uplink_power: return "set_uplink_power";
    case EventKind::remove_flow: return "remove_flow";
    case EventKind::migrate_vnf: return "migrate_vnf";
    case EventKind::client_join: return "client_join";
    case EventKind::client_leave: return "client_leave";
  }
  return "?";
}

std::optional<EventKind> parse_event_kind(std::string_view text) {
  for (int i = 0; i <= static_cast<int>(EventKind::client_leave); ++i) {
    auto k = static_cast<EventKind>(i);
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

namespace {

std::vector<std::string> tokens(std::string_view line) {
  std::vector<std::string> out;
  std::istringstream in{std::string(line)};
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  if (text == "-") return out;
  std::stringstream in(text);
  for (std::string item; std::getline(in, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double number(const std::string& text, int line, std::string_view what) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ParseError(line, "expected a number for " + std::string(what) + ", got '" + text + "'");
  }
  return v;
}

long long integer(const std::string& text, int line, std::string_view what) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || v < 0) {
    throw ParseError(line, "expected a non-negative integer for " + std::string(what) + ", got '" + text + "'");
  }
  return v;
}

/// key=value attributes following the positional fields of a declaration.
std::map<std::string, double> attributes(const std::vector<std::string>& toks, std::size_t from, int line,
                                         std::initializer_list<std::string_view> allowed) {
  std::map<std::string, double> out;
  for (std::size_t i = from; i < toks.size(); ++i) {
    auto eq = toks[i].find('=');
    if (eq == std::string::npos) throw ParseError(line, "expected key=value, got '" + toks[i] + "'");
    std::string key = toks[i].substr(0, eq);
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ParseError(line, "unknown attribute '" + key + "'");
    }
    out[key] = number(toks[i].substr(eq + 1), line, key);
  }
  return out;
}

struct Declared {
  std::string kind;  // "node", "link", "workload", "service"
  int line = 0;
};

class Parser {
 public:
  Parser(std::string_view text, std::string name) : text_(text) { scenario_.name = std::move(name); }

  Scenario parse() {
    std::istringstream in{std::string(text_)};
    int line_no = 0;
    for (std::string line; std::getline(in, line);) {
      ++line_no;
      if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
      auto toks = tokens(line);
      if (toks.empty()) continue;
      statement(toks, line_no);
    }
    return finish();
  }

 private:
  void statement(const std::vector<std::string>& t, int line) {
    const std::string& head = t[0];
    if (head == "CONFIG") config(t, line);
    else if (head == "MODE") mode(t, line);
    else if (head == "NODE") node(t, line);
    else if (head == "LINK") link(t, line);
    else if (head == "CONTROLLERS") controllers(t, line);
    else if (head == "VNF" || head == "APP") workload(t, line);
    else if (head == "SERVICE") service(t, line);
    else if (head == "AT") event(t, line);
    else throw ParseError(line, "unknown statement '" + head + "'");
  }

  void arity(const std::vector<std::string>& t, std::size_t min, int line) {
    if (t.size() < min) throw ParseError(line, t[0] + ": too few fields");
  }

  void declare(const std::string& id, const std::string& kind, int line) {
    auto [it, fresh] = ids_.emplace(id, Declared{kind, line});
    if (!fresh) {
      throw ParseError(line, "duplicate id " + id + " (first declared on line " + std::to_string(it->second.line) + ")");
    }
  }

  void config(const std::vector<std::string>& t, int line) {
    if (t.size() != 3) throw ParseError(line, "CONFIG takes a key and a value");
    const std::string& key = t[1];
    const std::string& v = t[2];
    Config& c = scenario_.config;
    if (key == "seed") c.seed = static_cast<std::uint64_t>(integer(v, line, key));
    else if (key == "max_ticks") c.max_ticks = static_cast<int>(integer(v, line, key));
    else if (key == "max_iters") c.max_iters = static_cast<int>(integer(v, line, key));
    else if (key == "proactive") {
      if (v != "on" && v != "off") throw ParseError(line, "proactive must be on or off");
      c.proactive = v == "on";
    }
    else if (key == "delay_ms") c.thresholds.delay_ms = number(v, line, key);
    else if (key == "jitter_ms") c.thresholds.jitter_ms = number(v, line, key);
    else if (key == "throughput_floor") c.thresholds.throughput_floor = number(v, line, key);
    else if (key == "reply_rate_floor") c.thresholds.controller_reply_rate_floor = number(v, line, key);
    else if (key == "load_factor_ceiling") c.thresholds.load_factor_ceiling = number(v, line, key);
    else if (key == "interference_ceiling") c.thresholds.interference_ceiling = number(v, line, key);
    else if (key == "power_step") c.power_step = number(v, line, key);
    else if (key == "bn_prior") c.bn.prior = number(v, line, key);
    else if (key == "bn_link_direct") c.bn.link_direct = number(v, line, key);
    else if (key == "bn_link_propagated") c.bn.link_propagated = number(v, line, key);
    else if (key == "bn_leak") c.bn.leak = number(v, line, key);
    else throw ParseError(line, "unknown CONFIG key '" + key + "'");
  }

  void mode(const std::vector<std::string>& t, int line) {
    if (t.size() != 2) throw ParseError(line, "MODE takes one value");
    auto m = net::parse_control_mode(t[1]);
    if (!m) throw ParseError(line, "unknown control mode '" + t[1] + "'");
    decl_.mode = *m;
    mode_line_ = line;
  }

  void node(const std::vector<std::string>& t, int line) {
    arity(t, 3, line);
    auto kind = net::parse_node_kind(t[2]);
    if (!kind) throw ParseError(line, "unknown node kind '" + t[2] + "'");
    declare(t[1], "node", line);
    net::Node n = net::make_node(NodeId(t[1]), *kind);
    auto attrs = attributes(t, 3, line, {"cpu", "mem", "cap", "req", "power"});
    if (attrs.contains("cpu")) n.cpu = attrs["cpu"];
    if (attrs.contains("mem")) n.mem = attrs["mem"];
    if (attrs.contains("cap")) {
      if (*kind != NodeKind::controller) throw ParseError(line, "cap= applies to controllers only");
      n.request_capacity = attrs["cap"];
    }
    if (attrs.contains("req")) {
      if (*kind != NodeKind::switch_node) throw ParseError(line, "req= applies to switches only");
      n.request_rate = attrs["req"];
    }
    if (attrs.contains("power")) {
      if (*kind != NodeKind::access_point) throw ParseError(line, "power= applies to access points only");
      n.uplink_power = attrs["power"];
    }
    decl_.nodes.push_back(n);
    node_lines_[t[1]] = line;
  }

  void link(const std::vector<std::string>& t, int line) {
    arity(t, 5, line);
    auto kind = net::parse_link_kind(t[4]);
    if (!kind) throw ParseError(line, "unknown link kind '" + t[4] + "'");
    declare(t[1], "link", line);
    for (const std::string& end : {t[2], t[3]}) {
      if (!node_lines_.contains(end)) throw ParseError(line, "link endpoint " + end + " is not a declared node");
    }
    if (t[2] == t[3]) throw ParseError(line, "link " + t[1] + " is a self loop");
    net::Link l{LinkId(t[1]), NodeId(t[2]), NodeId(t[3]), *kind, net::LinkStatus::up, {}};
    auto attrs = attributes(t, 5, line, {"delay", "jitter", "throughput"});
    if (attrs.contains("delay")) l.metrics.delay_ms = attrs["delay"];
    if (attrs.contains("jitter")) l.metrics.jitter_ms = attrs["jitter"];
    if (attrs.contains("throughput")) l.metrics.throughput = attrs["throughput"];
    decl_.links.push_back(l);
    if (*kind == net::LinkKind::control && control_line_ == 0) control_line_ = line;
  }

  void controllers(const std::vector<std::string>& t, int line) {
    arity(t, 2, line);
    decl_.controllers.clear();
    for (std::size_t i = 1; i < t.size(); ++i) {
      if (!node_lines_.contains(t[i])) throw ParseError(line, "controller " + t[i] + " is not a declared node");
      decl_.controllers.push_back(NodeId(t[i]));
    }
  }

  const net::Node* declared_node(const std::string& id) const {
    for (const net::Node& n : decl_.nodes) {
      if (n.id.str() == id) return &n;
    }
    return nullptr;
  }

  void workload(const std::vector<std::string>& t, int line) {
    arity(t, 3, line);
    bool vnf = t[0] == "VNF";
    declare(t[1], "workload", line);
    const net::Node* host = declared_node(t[2]);
    if (!host) throw ParseError(line, "host " + t[2] + " is not a declared node");
    bool host_ok = host->kind == NodeKind::vm_host || (vnf && host->kind == NodeKind::server);
    if (!host_ok) throw ParseError(line, t[2] + " cannot host " + (vnf ? "VNFs" : "applications"));
    service::Workload w;
    w.id = t[1];
    w.kind = vnf ? service::WorkloadKind::vnf : service::WorkloadKind::app;
    w.host = host->id;
    auto attrs = attributes(t, 3, line, {"cpu", "mem", "cap", "load"});
    if (attrs.contains("cpu")) w.cpu = attrs["cpu"];
    if (attrs.contains("mem")) w.mem = attrs["mem"];
    if (attrs.contains("cap")) w.capacity = attrs["cap"];
    if (attrs.contains("load")) w.load = attrs["load"];
    if (!(w.capacity > 0)) throw ParseError(line, "capacity must be > 0");
    if (w.load < 0 || w.cpu < 0 || w.mem < 0) throw ParseError(line, "cpu, mem and load must be >= 0");
    network_.inventory.workloads().push_back(w);
    workload_lines_[w.id] = line;
  }

  void service(const std::vector<std::string>& t, int line) {
    arity(t, 2, line);
    declare(t[1], "service", line);
    std::map<std::string, std::string> fields;
    for (std::size_t i = 2; i < t.size(); i += 2) {
      const std::string& key = t[i];
      if (key != "FG" && key != "APPS" && key != "FROM" && key != "TO" && key != "USERS") {
        throw ParseError(line, "unknown SERVICE field '" + key + "'");
      }
      if (i + 1 >= t.size()) throw ParseError(line, key + " needs a value");
      fields[key] = t[i + 1];
    }
    for (const char* required : {"FG", "FROM", "TO"}) {
      if (!fields.contains(required)) throw ParseError(line, std::string("SERVICE lacks ") + required);
    }
    service::Service s;
    s.id = t[1];
    s.forwarding_graph = split_list(fields["FG"]);
    if (s.forwarding_graph.empty()) throw ParseError(line, "forwarding graph must name at least one VNF");
    std::set<std::string> seen;
    for (const std::string& v : s.forwarding_graph) {
      const service::Workload* w = network_.inventory.find_workload(v);
      if (!w || w->kind != service::WorkloadKind::vnf) throw ParseError(line, v + " is not a declared VNF");
      if (!seen.insert(v).second) throw ParseError(line, "VNF " + v + " appears twice in the forwarding graph");
    }
    if (fields.contains("APPS")) s.apps = split_list(fields["APPS"]);
    for (const std::string& a : s.apps) {
      const service::Workload* w = network_.inventory.find_workload(a);
      if (!w || w->kind != service::WorkloadKind::app) throw ParseError(line, a + " is not a declared application");
    }
    for (const char* end : {"FROM", "TO"}) {
      if (!declared_node(fields[end])) throw ParseError(line, fields[end] + " is not a declared node");
    }
    s.client = NodeId(fields["FROM"]);
    s.server = NodeId(fields["TO"]);
    if (fields.contains("USERS")) {
      for (const std::string& u : split_list(fields["USERS"])) {
        const net::Node* n = declared_node(u);
        if (!n || n->kind != NodeKind::client) throw ParseError(line, u + " is not a declared client");
        s.users.push_back(NodeId(u));
      }
    }
    network_.inventory.services().push_back(s);
  }

  void event(const std::vector<std::string>& t, int line) {
    arity(t, 3, line);
    Event e;
    e.tick = static_cast<int>(integer(t[1], line, "tick"));
    auto kind = parse_event_kind(t[2]);
    if (!kind) throw ParseError(line, "unknown event kind '" + t[2] + "'");
    e.kind = *kind;
    e.args.assign(t.begin() + 3, t.end());
    e.line = line;
    if (!scenario_.events.empty() && e.tick < scenario_.events.back().tick && !warned_order_) {
      scenario_.warnings.push_back("line " + std::to_string(line) + ": events out of tick order; reordered");
      warned_order_ = true;
    }
    scenario_.events.push_back(std::move(e));
  }

  // ------------------------------------------------------------ validation

  void check_event(const Event& e, std::map<std::string, std::string>& live_nodes) {
    auto need = [&](std::size_t min, std::size_t max) {
      if (e.args.size() < min || e.args.size() > max) {
        throw ParseError(e.line, std::string(to_string(e.kind)) + ": wrong number of arguments");
      }
    };
    auto link_arg = [&](const std::string& id) {
      auto it = ids_.find(id);
      if (it == ids_.end() || it->second.kind != "link") throw ParseError(e.line, "unknown link " + id);
    };
    auto node_arg = [&](const std::string& id) -> const std::string& {
      auto it = live_nodes.find(id);
      if (it == live_nodes.end()) throw ParseError(e.line, "unknown node " + id);
      return it->second;
    };
    auto workload_arg = [&](const std::string& id, std::optional<service::WorkloadKind> kind) {
      const service::Workload* w = network_.inventory.find_workload(id);
      if (!w) throw ParseError(e.line, "unknown workload " + id);
      if (kind && w->kind != *kind) {
        throw ParseError(e.line, id + " is not " + (*kind == service::WorkloadKind::vnf ? "a VNF" : "an application"));
      }
    };
    auto value_arg = [&](const std::string& v) {
      if (number(v, e.line, "value") < 0) throw ParseError(e.line, "value must be >= 0");
    };

    switch (e.kind) {
      case EventKind::fail_link:
      case EventKind::restore_link:
        need(1, 1);
        link_arg(e.args[0]);
        break;
      case EventKind::crash_node:
      case EventKind::restore_node:
        need(1, 1);
        node_arg(e.args[0]);
        break;
      case EventKind::crash_app:
        need(1, 1);
        workload_arg(e.args[0], service::WorkloadKind::app);
        break;
      case EventKind::crash_vnf:
        need(1, 1);
        workload_arg(e.args[0], service::WorkloadKind::vnf);
        break;
      case EventKind::crash_service:
        need(1, 1);
        if (!network_.inventory.find_service(e.args[0])) throw ParseError(e.line, "unknown service " + e.args[0]);
        break;
      case EventKind::misconfigure: {
        need(1, 1);
        const std::string& id = e.args[0];
        if (network_.inventory.find_service(id) || network_.inventory.find_workload(id)) break;
        const std::string& kind = node_arg(id);
        if (kind != "switch" && kind != "client") {
          throw ParseError(e.line, "cannot misconfigure " + id + ": not a service, workload, switch or client");
        }
        break;
      }
      case EventKind::set_metric:
        need(3, 3);
        link_arg(e.args[0]);
        if (!net::parse_link_metric(e.args[1])) throw ParseError(e.line, "unknown metric " + e.args[1]);
        value_arg(e.args[2]);
        break;
      case EventKind::set_load: {
        need(2, 2);
        value_arg(e.args[1]);
        if (network_.inventory.find_workload(e.args[0])) break;
        if (node_arg(e.args[0]) != "switch") throw ParseError(e.line, e.args[0] + " is not a workload or switch");
        break;
      }
      case EventKind::set_uplink_power:
        need(2, 2);
        if (node_arg(e.args[0]) != "access_point") throw ParseError(e.line, e.args[0] + " is not an access point");
        value_arg(e.args[1]);
        break;
      case EventKind::remove_flow:
        need(2, 2);
        if (node_arg(e.args[0]) != "switch") throw ParseError(e.line, e.args[0] + " is not a switch");
        break;
      case EventKind::migrate_vnf: {
        need(2, 2);
        workload_arg(e.args[0], service::WorkloadKind::vnf);
        const std::string& kind = node_arg(e.args[1]);
        if (kind != "vm_host" && kind != "server") throw ParseError(e.line, e.args[1] + " cannot host VNFs");
        break;
      }
      case EventKind::client_join: {
        need(2, 3);
        if (live_nodes.contains(e.args[0])) throw ParseError(e.line, "node " + e.args[0] + " already exists");
        auto declared = ids_.find(e.args[0]);
        if (declared != ids_.end() && declared->second.kind != "node") {
          throw ParseError(e.line, "id " + e.args[0] + " is already used");
        }
        const std::string& kind = node_arg(e.args[1]);
        if (kind != "switch" && kind != "access_point") {
          throw ParseError(e.line, e.args[1] + " is not a switch or access point");
        }
        if (e.args.size() == 3 && !network_.inventory.find_service(e.args[2])) {
          throw ParseError(e.line, "unknown service " + e.args[2]);
        }
        live_nodes[e.args[0]] = "client";
        break;
      }
      case EventKind::client_leave:
        need(1, 1);
        if (node_arg(e.args[0]) != "client") throw ParseError(e.line, e.args[0] + " is not a client");
        live_nodes.erase(e.args[0]);
        break;
    }
  }

  Scenario finish() {
    if (decl_.mode == net::ControlMode::in_band && control_line_ != 0) {
      throw ParseError(control_line_, "control link in in_band topology");
    }
    try {
      network_.topology = net::build_topology(decl_);
      scenario_.config.thresholds.validate();
    } catch (const Error& e) {
      throw ParseError(0, e.what());
    }
    for (const service::Workload& w : network_.inventory.workloads()) {
      if (service::spare_cpu(network_, w.host) < 0 || service::spare_mem(network_, w.host) < 0) {
        throw ParseError(workload_lines_[w.id], "host " + w.host.str() + " is over-committed");
      }
    }
    const auto& bn = scenario_.config.bn;
    bool bn_ok = bn.prior > 0 && bn.prior < 1 && bn.link_direct > 0 && bn.link_direct <= 1 &&
                 bn.link_propagated > 0 && bn.link_propagated <= 1 && bn.leak >= 0 && bn.leak < 1;
    if (!bn_ok) throw ParseError(0, "Bayesian network parameters out of range");
    if (scenario_.config.power_step <= 0) throw ParseError(0, "power_step must be > 0");

    std::stable_sort(scenario_.events.begin(), scenario_.events.end(),
                     [](const Event& a, const Event& b) { return a.tick < b.tick; });
    std::map<std::string, std::string> live;
    for (const net::Node& n : network_.topology.nodes()) live[n.id.str()] = std::string(net::to_string(n.kind));
    for (const Event& e : scenario_.events) check_event(e, live);

    scenario_.network = std::move(network_);
    return std::move(scenario_);
  }

  std::string_view text_;
  Scenario scenario_;
  net::TopologyDecl decl_;
  service::Network network_;
  std::map<std::string, Declared> ids_;
  std::map<std::string, int> node_lines_;
  std::map<std::string, int> workload_lines_;
  int mode_line_ = 0;
  int control_line_ = 0;
  bool warned_order_ = false;
};

}  // namespace

Scenario parse_scenario(std::string_view text, std::string name) {
  return Parser(text, std::move(name)).parse();
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(0, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path.stem().string());
}

}  // namespace healnet::sim
