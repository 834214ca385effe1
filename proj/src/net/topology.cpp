#include <algorithm>
#include <set>

#include "healnet/error.hpp"
#include "healnet/net_model.hpp"

namespace healnet::net {

namespace {

template <class Enum, std::size_t N>
std::optional<Enum> lookup(const std::pair<std::string_view, Enum> (&table)[N], std::string_view text) {
  for (const auto& [name, value] : table) {
    if (name == text) return value;
  }
  return std::nullopt;
}

constexpr std::pair<std::string_view, NodeKind> kNodeKinds[] = {
    {"switch", NodeKind::switch_node}, {"controller", NodeKind::controller},
    {"host", NodeKind::host},          {"server", NodeKind::server},
    {"client", NodeKind::client},      {"access_point", NodeKind::access_point},
    {"vm_host", NodeKind::vm_host},
};

constexpr std::pair<std::string_view, LinkMetric> kMetrics[] = {
    {"delay", LinkMetric::delay},
    {"jitter", LinkMetric::jitter},
    {"throughput", LinkMetric::throughput},
};

}  // namespace

std::string_view to_string(NodeKind kind) {
  for (const auto& [name, value] : kNodeKinds) {
    if (value == kind) return name;
  }
  return "?";
}

std::string_view to_string(NodeStatus status) {
  switch (status) {
    case NodeStatus::up: return "up";
    case NodeStatus::crashed: return "crashed";
    case NodeStatus::misconfigured: return "misconfigured";
  }
  return "?";
}

std::string_view to_string(SwitchMode mode) {
  return mode == SwitchMode::secure ? "secure" : "standalone";
}

std::string_view to_string(LinkKind kind) { return kind == LinkKind::data ? "data" : "control"; }

std::string_view to_string(LinkStatus status) { return status == LinkStatus::up ? "up" : "down"; }

std::string_view to_string(ControlMode mode) {
  return mode == ControlMode::in_band ? "in_band" : "out_of_band";
}

std::string_view to_string(Installer installer) {
  return installer == Installer::controller ? "controller" : "self_healer";
}

std::string_view to_string(LinkMetric metric) {
  for (const auto& [name, value] : kMetrics) {
    if (value == metric) return name;
  }
  return "?";
}

std::optional<NodeKind> parse_node_kind(std::string_view text) { return lookup(kNodeKinds, text); }

std::optional<LinkKind> parse_link_kind(std::string_view text) {
  if (text == "data") return LinkKind::data;
  if (text == "control") return LinkKind::control;
  return std::nullopt;
}

std::optional<ControlMode> parse_control_mode(std::string_view text) {
  if (text == "in_band") return ControlMode::in_band;
  if (text == "out_of_band") return ControlMode::out_of_band;
  return std::nullopt;
}

std::optional<LinkMetric> parse_link_metric(std::string_view text) { return lookup(kMetrics, text); }

Node make_node(NodeId id, NodeKind kind) {
  Node n;
  n.id = std::move(id);
  n.kind = kind;
  if (kind == NodeKind::switch_node) n.switch_mode = SwitchMode::secure;
  if (kind == NodeKind::access_point) n.uplink_power = 0.0;
  if (kind == NodeKind::vm_host || kind == NodeKind::server) {
    n.cpu = 16.0;
    n.mem = 32.0;
  }
  return n;
}

const Node* Topology::find_node(const NodeId& id) const {
  auto it = node_index_.find(id.str());
  return it == node_index_.end() ? nullptr : &nodes_[it->second];
}

const Link* Topology::find_link(const LinkId& id) const {
  auto it = link_index_.find(id.str());
  return it == link_index_.end() ? nullptr : &links_[it->second];
}

const Node& Topology::node(const NodeId& id) const {
  if (const Node* n = find_node(id)) return *n;
  throw UnknownIdError("unknown node " + id.str());
}

const Link& Topology::link(const LinkId& id) const {
  if (const Link* l = find_link(id)) return *l;
  throw UnknownIdError("unknown link " + id.str());
}

Node& Topology::mutable_node(const NodeId& id) { return const_cast<Node&>(node(id)); }

Link& Topology::mutable_link(const LinkId& id) { return const_cast<Link&>(link(id)); }

const FlowRule* Topology::find_rule(const NodeId& sw, std::string_view match) const {
  auto it = rules_.find(RuleKey{sw, std::string(match)});
  return it == rules_.end() ? nullptr : &it->second;
}

std::vector<const Link*> Topology::incident(const NodeId& n) const {
  std::vector<const Link*> out;
  for (const Link& l : links_) {
    if (l.touches(n)) out.push_back(&l);
  }
  return out;
}

const Link* Topology::control_link_of(const NodeId& sw) const {
  for (const Link& l : links_) {
    if (l.kind == LinkKind::control && l.touches(sw)) return &l;
  }
  return nullptr;
}

void Topology::set_link_status(const LinkId& id, LinkStatus status) {
  mutable_link(id).status = status;
  ++revision_;
}

void Topology::set_node_status(const NodeId& id, NodeStatus status) {
  mutable_node(id).status = status;
  ++revision_;
}

void Topology::set_link_metric(const LinkId& id, LinkMetric metric, double value) {
  LinkMetrics& m = mutable_link(id).metrics;
  switch (metric) {
    case LinkMetric::delay: m.delay_ms = value; break;
    case LinkMetric::jitter: m.jitter_ms = value; break;
    case LinkMetric::throughput: m.throughput = value; break;
  }
  ++revision_;
}

void Topology::set_uplink_power(const NodeId& ap, double power) {
  Node& n = mutable_node(ap);
  if (n.kind != NodeKind::access_point) throw InvariantError(ap.str() + " is not an access point");
  if (power < 0.0) throw InvariantError("uplink power must be >= 0");
  n.uplink_power = power;
  ++revision_;
}

void Topology::set_request_rate(const NodeId& sw, double rate) {
  Node& n = mutable_node(sw);
  if (!n.is_switch()) throw InvariantError(sw.str() + " is not a switch");
  n.request_rate = rate;
  ++revision_;
}

void Topology::set_switch_mode(const NodeId& sw, SwitchMode mode) {
  Node& n = mutable_node(sw);
  if (!n.is_switch()) throw InvariantError(sw.str() + " is not a switch");
  n.switch_mode = mode;
  ++revision_;
}

void Topology::install_flow(const FlowRule& rule) {
  const Node& sw = node(rule.switch_id);
  if (!sw.is_switch()) throw InvariantError(rule.switch_id.str() + " is not a switch");
  bool neighbor = std::any_of(links_.begin(), links_.end(), [&](const Link& l) {
    return l.kind == LinkKind::data && l.touches(rule.switch_id) && l.other(rule.switch_id) == rule.out_port;
  });
  if (!neighbor) {
    throw InvariantError("out_port " + rule.out_port.str() + " is not a data neighbor of " +
                         rule.switch_id.str());
  }
  rules_[RuleKey{rule.switch_id, rule.match}] = rule;
  ++revision_;
}

bool Topology::remove_flow(const NodeId& sw, std::string_view match) {
  node(sw);
  bool erased = rules_.erase(RuleKey{sw, std::string(match)}) > 0;
  if (erased) ++revision_;
  return erased;
}

std::optional<NodeId> Topology::fail_over() {
  for (std::size_t step = 1; step < controllers_.size(); ++step) {
    std::size_t candidate = (active_ + step) % controllers_.size();
    if (node(controllers_[candidate]).is_up()) {
      active_ = candidate;
      ++revision_;
      return controllers_[candidate];
    }
  }
  return std::nullopt;
}

void Topology::attach_node(Node n, Link l) {
  if (find_node(n.id)) throw InvariantError("duplicate node id " + n.id.str());
  if (find_link(l.id)) throw InvariantError("duplicate link id " + l.id.str());
  if (!l.touches(n.id)) throw InvariantError("link " + l.id.str() + " does not touch " + n.id.str());
  node(l.other(n.id));
  nodes_.push_back(std::move(n));
  links_.push_back(std::move(l));
  reindex();
  ++revision_;
}

void Topology::detach_node(const NodeId& id) {
  node(id);
  if (std::find(controllers_.begin(), controllers_.end(), id) != controllers_.end()) {
    throw InvariantError("cannot detach controller " + id.str());
  }
  std::erase_if(nodes_, [&](const Node& n) { return n.id == id; });
  std::erase_if(links_, [&](const Link& l) { return l.touches(id); });
  std::erase_if(rules_, [&](const auto& entry) {
    return entry.second.switch_id == id || entry.second.out_port == id;
  });
  reindex();
  ++revision_;
}

void Topology::reindex() {
  node_index_.clear();
  link_index_.clear();
  for (std::size_t i = 0; i < nodes_.size(); ++i) node_index_[nodes_[i].id.str()] = i;
  for (std::size_t i = 0; i < links_.size(); ++i) link_index_[links_[i].id.str()] = i;
}

bool Topology::operator==(const Topology& other) const {
  return mode_ == other.mode_ && nodes_ == other.nodes_ && links_ == other.links_ &&
         rules_ == other.rules_ && controllers_ == other.controllers_ && active_ == other.active_;
}

Topology build_topology(const TopologyDecl& decl) {
  Topology t;
  t.mode_ = decl.mode;
  t.nodes_ = decl.nodes;
  t.links_ = decl.links;
  t.controllers_ = decl.controllers;

  std::set<std::string> seen;
  for (const Node& n : t.nodes_) {
    if (n.id.empty()) throw InvariantError("empty node id");
    if (!seen.insert(n.id.str()).second) throw InvariantError("duplicate node id " + n.id.str());
    if (n.switch_mode.has_value() != n.is_switch()) {
      throw InvariantError("switch mode set on non-switch or missing on switch " + n.id.str());
    }
    if (n.uplink_power.has_value() != (n.kind == NodeKind::access_point)) {
      throw InvariantError("uplink power set on non access point or missing on " + n.id.str());
    }
  }
  seen.clear();
  for (const Link& l : t.links_) {
    if (l.id.empty()) throw InvariantError("empty link id");
    if (!seen.insert(l.id.str()).second) throw InvariantError("duplicate link id " + l.id.str());
  }
  t.reindex();

  for (const Link& l : t.links_) {
    if (l.a == l.b) throw InvariantError("link " + l.id.str() + " is a self loop");
    const Node* a = t.find_node(l.a);
    const Node* b = t.find_node(l.b);
    if (!a || !b) throw InvariantError("link " + l.id.str() + " has an undeclared endpoint");
    if (l.kind == LinkKind::control) {
      if (decl.mode == ControlMode::in_band) {
        throw InvariantError("control link in in_band topology: " + l.id.str());
      }
      bool shape_ok = (a->is_switch() && b->kind == NodeKind::controller) ||
                      (b->is_switch() && a->kind == NodeKind::controller);
      if (!shape_ok) {
        throw InvariantError("control link " + l.id.str() + " must join a switch and a controller");
      }
    }
  }

  if (t.controllers_.empty()) {
    for (const Node& n : t.nodes_) {
      if (n.kind == NodeKind::controller) t.controllers_.push_back(n.id);
    }
  }
  if (t.controllers_.empty()) throw InvariantError("topology has no controller");
  seen.clear();
  for (const NodeId& c : t.controllers_) {
    const Node* n = t.find_node(c);
    if (!n || n->kind != NodeKind::controller) throw InvariantError(c.str() + " is not a controller");
    if (!seen.insert(c.str()).second) throw InvariantError("controller listed twice: " + c.str());
  }

  if (decl.mode == ControlMode::out_of_band) {
    for (const Node& n : t.nodes_) {
      if (!n.is_switch()) continue;
      auto count = std::count_if(t.links_.begin(), t.links_.end(), [&](const Link& l) {
        return l.kind == LinkKind::control && l.touches(n.id);
      });
      if (count == 0) throw InvariantError("switch without control link: " + n.id.str());
      if (count > 1) throw InvariantError("switch with more than one control link: " + n.id.str());
    }
  }
  return t;
}

}  // namespace healnet::net
