#include <algorithm>
#include <cmath>

#include "healnet/error.hpp"
#include "healnet/service_model.hpp"

namespace healnet {

void MetricThresholds::validate() const {
  if (!(delay_ms > 0 && jitter_ms > 0 && throughput_floor > 0 && load_factor_ceiling > 0 &&
        interference_ceiling > 0)) {
    throw InvariantError("metric thresholds must be positive");
  }
  if (!(controller_reply_rate_floor > 0 && controller_reply_rate_floor <= 1)) {
    throw InvariantError("reply rate floor must lie in (0, 1]");
  }
}

}  // namespace healnet

namespace healnet::service {

using net::NodeKind;
using net::NodeStatus;

std::string_view to_string(WorkloadKind kind) { return kind == WorkloadKind::vnf ? "vnf" : "app"; }

std::string_view to_string(WorkloadStatus status) {
  switch (status) {
    case WorkloadStatus::running: return "running";
    case WorkloadStatus::crashed: return "crashed";
    case WorkloadStatus::misconfigured: return "misconfigured";
  }
  return "?";
}

std::string_view to_string(ServiceStatus status) {
  switch (status) {
    case ServiceStatus::available: return "available";
    case ServiceStatus::degraded: return "degraded";
    case ServiceStatus::failed: return "failed";
  }
  return "?";
}

// ---------------------------------------------------------------- Inventory

const Workload* Inventory::find_workload(std::string_view id) const {
  auto it = std::find_if(workloads_.begin(), workloads_.end(),
                         [&](const Workload& w) { return w.id == id; });
  return it == workloads_.end() ? nullptr : &*it;
}

Workload* Inventory::find_workload(std::string_view id) {
  return const_cast<Workload*>(std::as_const(*this).find_workload(id));
}

const Workload& Inventory::workload(std::string_view id) const {
  if (const Workload* w = find_workload(id)) return *w;
  throw UnknownIdError("unknown workload " + std::string(id));
}

Workload& Inventory::workload(std::string_view id) {
  return const_cast<Workload&>(std::as_const(*this).workload(id));
}

const Service* Inventory::find_service(std::string_view id) const {
  auto it = std::find_if(services_.begin(), services_.end(),
                         [&](const Service& s) { return s.id == id; });
  return it == services_.end() ? nullptr : &*it;
}

Service* Inventory::find_service(std::string_view id) {
  return const_cast<Service*>(std::as_const(*this).find_service(id));
}

const Service& Inventory::service(std::string_view id) const {
  if (const Service* s = find_service(id)) return *s;
  throw UnknownIdError("unknown service " + std::string(id));
}

Service& Inventory::service(std::string_view id) {
  return const_cast<Service&>(std::as_const(*this).service(id));
}

std::vector<const Workload*> Inventory::group_of(std::string_view id) const {
  const std::string& root = workload(id).group();
  std::vector<const Workload*> out;
  for (const Workload& w : workloads_) {
    if (w.id == root) out.insert(out.begin(), &w);
    else if (w.replica_of == root) out.push_back(&w);
  }
  return out;
}

std::vector<const Service*> Inventory::services_using(std::string_view id) const {
  const std::string& root = workload(id).group();
  std::vector<const Service*> out;
  for (const Service& s : services_) {
    bool uses = std::find(s.forwarding_graph.begin(), s.forwarding_graph.end(), root) !=
                    s.forwarding_graph.end() ||
                std::find(s.apps.begin(), s.apps.end(), root) != s.apps.end();
    if (uses) out.push_back(&s);
  }
  return out;
}

// ------------------------------------------------------------- derivations

std::string delivery_match(std::string_view service, const NodeId& client) {
  return std::string(service) + "@" + client.str();
}

std::string chain_match(std::string_view service) { return std::string(service); }

std::optional<FirstHop> first_hop(const net::Topology& t, const NodeId& client) {
  for (const net::Link* l : t.incident(client)) {
    if (l->kind != net::LinkKind::data) continue;
    const net::Node& next = t.node(l->other(client));
    if (next.is_switch()) return FirstHop{next.id, client};
    if (next.kind == NodeKind::access_point) {
      for (const net::Link* up : t.incident(next.id)) {
        if (up->kind != net::LinkKind::data) continue;
        const net::Node& sw = t.node(up->other(next.id));
        if (sw.is_switch()) return FirstHop{sw.id, next.id};
      }
    }
  }
  return std::nullopt;
}

namespace {

bool data_link_up(const net::Link& l) { return l.kind == net::LinkKind::data && l.is_up(); }

net::TransitFn transit_for(const net::Topology& t, const net::ControlView& control,
                           std::string match) {
  return [&t, &control, match = std::move(match)](const net::Node& n) {
    if (n.is_switch()) return net::can_forward(t, control, n.id, match);
    if (n.kind == NodeKind::access_point) return n.is_up();
    return false;
  };
}

void add_path(const net::Topology& t, const NodeId& from, const net::Path& path,
              ServiceTopology& st) {
  for (const NodeId& n : net::path_nodes(t, from, path)) st.nodes.insert(n);
  for (const LinkId& l : path) st.links.insert(l);
}

}  // namespace

std::optional<ServiceTopology> derive_service_topology(const net::Topology& t,
                                                       const net::ControlView& control,
                                                       const Inventory& inv, const Service& s) {
  if (!t.find_node(s.client) || !t.find_node(s.server)) return std::nullopt;

  std::vector<NodeId> waypoints{s.client};
  for (const std::string& vnf : s.forwarding_graph) {
    const Workload* w = inv.find_workload(vnf);
    if (!w || !t.find_node(w->host)) return std::nullopt;
    waypoints.push_back(w->host);
  }
  waypoints.push_back(s.server);

  ServiceTopology st;
  st.service = s.id;
  auto chain_transit = transit_for(t, control, chain_match(s.id));
  for (std::size_t i = 0; i + 1 < waypoints.size(); ++i) {
    auto segment = net::shortest_path(t, waypoints[i], waypoints[i + 1], data_link_up, chain_transit);
    if (!segment) return std::nullopt;
    st.chain_path.insert(st.chain_path.end(), segment->begin(), segment->end());
  }
  add_path(t, s.client, st.chain_path, st);
  for (const NodeId& n : waypoints) st.nodes.insert(n);

  for (const NodeId& user : s.users) {
    if (!t.find_node(user)) {
      st.unreachable_users.push_back(user);
      continue;
    }
    auto transit = transit_for(t, control, delivery_match(s.id, user));
    auto path = net::shortest_path(t, s.server, user, data_link_up, transit);
    if (!path) {
      st.unreachable_users.push_back(user);
      continue;
    }
    add_path(t, s.server, *path, st);
    st.user_paths.emplace(user, std::move(*path));
  }
  return st;
}

std::optional<ServiceTopology> derive_service_topology(const Network& net, const Service& s) {
  net::ControlView control(net.topology);
  return derive_service_topology(net.topology, control, net.inventory, s);
}

std::map<NodeId, bool> user_reachability(const Network& net, const Service& s,
                                         const std::optional<ServiceTopology>& st) {
  std::map<NodeId, bool> out;
  for (const NodeId& user : s.users) {
    bool ok = st.has_value() && st->user_paths.contains(user);
    if (ok) {
      const net::Node& n = net.topology.node(user);
      auto hop = first_hop(net.topology, user);
      ok = n.status != NodeStatus::crashed && hop &&
           net.topology.find_rule(hop->switch_id, delivery_match(s.id, user)) != nullptr;
    }
    out[user] = ok;
  }
  return out;
}

ServiceHealth assess_service(const Network& net, const Service& s, const MetricThresholds& th) {
  ServiceHealth h;
  h.topology = derive_service_topology(net, s);
  const Inventory& inv = net.inventory;

  bool failed = s.crashed || s.misconfigured() || !h.topology;
  for (const std::string& vnf : s.forwarding_graph) {
    const Workload* w = inv.find_workload(vnf);
    if (!w || !w->is_running()) failed = true;
  }
  for (const std::string& app : s.apps) {
    if (!inv.find_workload(app)) {
      failed = true;
      continue;
    }
    auto members = inv.group_of(app);
    bool any_alive = std::any_of(members.begin(), members.end(), [](const Workload* w) {
      return w->status != WorkloadStatus::crashed;
    });
    if (!any_alive) failed = true;
  }
  for (const auto& [user, reachable] : user_reachability(net, s, h.topology)) {
    if (!reachable) {
      h.unreachable_users.push_back(user);
      failed = true;
    }
  }
  if (failed) {
    h.status = ServiceStatus::failed;
    return h;
  }

  for (const LinkId& id : h.topology->links) {
    const net::LinkMetrics& m = net.topology.link(id).metrics;
    if (m.delay_ms > th.delay_ms) {
      h.delay_high = true;
      h.worst_delay = std::max(h.worst_delay, m.delay_ms);
    }
    if (m.jitter_ms > th.jitter_ms) {
      h.jitter_high = true;
      h.worst_jitter = std::max(h.worst_jitter, m.jitter_ms);
    }
    if (m.throughput < th.throughput_floor) {
      h.worst_throughput = h.throughput_low ? std::min(h.worst_throughput, m.throughput) : m.throughput;
      h.throughput_low = true;
    }
  }
  for (const NodeId& n : h.topology->nodes) {
    const net::Node& node = net.topology.node(n);
    if (node.kind == NodeKind::access_point && node.uplink_power.value_or(0) > th.interference_ceiling) {
      h.jitter_high = true;
      h.worst_jitter = std::max(h.worst_jitter, *node.uplink_power);
    }
  }
  std::vector<std::string> groups = s.forwarding_graph;
  groups.insert(groups.end(), s.apps.begin(), s.apps.end());
  for (const std::string& g : groups) {
    for (const Workload* w : inv.group_of(g)) {
      if (w->is_running() && w->load > w->capacity * th.load_factor_ceiling) {
        double ratio = w->capacity / w->load;
        h.worst_throughput = h.throughput_low ? std::min(h.worst_throughput, ratio) : ratio;
        h.throughput_low = true;
      }
    }
  }
  if (h.delay_high || h.jitter_high || h.throughput_low) h.status = ServiceStatus::degraded;
  return h;
}

ServiceStatus evaluate_service(const Network& net, const Service& s, const MetricThresholds& th) {
  return assess_service(net, s, th).status;
}

// ------------------------------------------------------------ orchestration

double spare_cpu(const Network& net, const NodeId& host) {
  double used = 0.0;
  for (const Workload& w : net.inventory.workloads()) {
    if (w.host == host) used += w.cpu;
  }
  return net.topology.node(host).cpu - used;
}

double spare_mem(const Network& net, const NodeId& host) {
  double used = 0.0;
  for (const Workload& w : net.inventory.workloads()) {
    if (w.host == host) used += w.mem;
  }
  return net.topology.node(host).mem - used;
}

std::optional<NodeId> first_fit_host(const Network& net, double cpu, double mem,
                                     const std::optional<NodeId>& exclude) {
  for (const net::Node& n : net.topology.nodes()) {
    if (n.kind != NodeKind::vm_host || !n.is_up()) continue;
    if (exclude && n.id == *exclude) continue;
    if (spare_cpu(net, n.id) >= cpu && spare_mem(net, n.id) >= mem) return n.id;
  }
  return std::nullopt;
}

void allocate_app_path(Network& net, std::string_view app) {
  Workload& w = net.inventory.workload(app);
  const net::Topology& t = net.topology;
  // Out of band, the northbound session uses the management network.
  if (t.mode() == net::ControlMode::out_of_band) {
    w.allocated_path = net::Path{};
    return;
  }
  auto transit = [](const net::Node& n) {
    return (n.is_switch() || n.kind == NodeKind::access_point) && n.status != NodeStatus::crashed;
  };
  w.allocated_path = net::shortest_path(t, w.host, t.active_controller(), data_link_up, transit);
}

MigrationResult migrate_workload(Network& net, std::string_view id, const NodeId& target) {
  Workload& w = net.inventory.workload(id);
  const net::Node& host = net.topology.node(target);
  if (host.kind != NodeKind::vm_host && host.kind != NodeKind::server) {
    throw CapacityError(target.str() + " cannot host workloads");
  }
  if (!host.is_up()) throw CapacityError("target host " + target.str() + " is down");
  if (w.host == target) throw CapacityError(std::string(id) + " already runs on " + target.str());
  if (spare_cpu(net, target) < w.cpu || spare_mem(net, target) < w.mem) {
    throw CapacityError("target host " + target.str() + " lacks spare capacity");
  }
  w.host = target;
  if (w.kind == WorkloadKind::app) allocate_app_path(net, id);

  MigrationResult result;
  result.topology_changed = true;
  for (const Service* s : net.inventory.services_using(id)) result.affected_services.push_back(s->id);
  return result;
}

void set_group_load(Inventory& inv, std::string_view id, double total) {
  if (total < 0) throw InvariantError("load must be >= 0");
  std::vector<std::string> members;
  for (const Workload* w : inv.group_of(id)) members.push_back(w->id);
  for (const std::string& m : members) inv.workload(m).load = total / static_cast<double>(members.size());
}

std::string scale_out(Network& net, std::string_view id) {
  auto group = net.inventory.group_of(id);
  const Workload original = *group.front();
  double total = 0.0;
  for (const Workload* w : group) total += w->load;

  auto host = first_fit_host(net, original.cpu, original.mem);
  if (!host) throw CapacityError("no host with spare capacity for a replica of " + original.id);

  Workload replica = original;
  std::size_t n = group.size() + 1;
  do {
    replica.id = original.id + "#" + std::to_string(n++);
  } while (net.inventory.find_workload(replica.id));
  replica.replica_of = original.id;
  replica.host = *host;
  replica.status = WorkloadStatus::running;
  replica.config_version = 1;
  replica.allocated_path.reset();
  net.inventory.workloads().push_back(replica);
  if (replica.kind == WorkloadKind::app) allocate_app_path(net, replica.id);
  set_group_load(net.inventory, original.id, total);
  return replica.id;
}

double scale_up(Network& net, std::string_view id) {
  Workload& w = net.inventory.workload(id);
  double growth = 1.0;
  if (w.cpu > 0) growth = std::min(growth, spare_cpu(net, w.host) / w.cpu);
  if (w.mem > 0) growth = std::min(growth, spare_mem(net, w.host) / w.mem);
  if (!(growth > 0)) throw CapacityError("host " + w.host.str() + " has no spare cpu/mem");
  w.cpu *= 1.0 + growth;
  w.mem *= 1.0 + growth;
  w.capacity *= 1.0 + growth;
  return w.capacity;
}

bool restart_workload(Network& net, std::string_view id) {
  Workload& w = net.inventory.workload(id);
  if (!net.topology.node(w.host).is_up()) return false;
  w.status = WorkloadStatus::running;
  w.config_version = 1;
  return true;
}

void crash_workloads_on(Network& net, const NodeId& host) {
  for (Workload& w : net.inventory.workloads()) {
    if (w.host == host) w.status = WorkloadStatus::crashed;
  }
}

bool install_delivery_rule(net::Topology& t, std::string_view service, const NodeId& client,
                           net::Installer by) {
  auto hop = first_hop(t, client);
  if (!hop) return false;
  t.install_flow(net::FlowRule{hop->switch_id, delivery_match(service, client), hop->out_port, by});
  return true;
}

void provision(Network& net) {
  for (const Service& s : net.inventory.services()) {
    for (const NodeId& user : s.users) {
      install_delivery_rule(net.topology, s.id, user, net::Installer::controller);
    }
  }
  for (const Workload& w : net.inventory.workloads()) {
    if (w.kind == WorkloadKind::app) allocate_app_path(net, w.id);
  }
}

}  // namespace healnet::service
