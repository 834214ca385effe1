#include <algorithm>

#include "healnet/recovery.hpp"

namespace healnet::recovery {

using diagnosis::CauseKind;
using diagnosis::RootCause;
using monitoring::Plane;
using monitoring::SymptomKey;
using monitoring::SymptomKind;

std::string_view to_string(ActionKind kind) {
  switch (kind) {
    case ActionKind::reconfigure_service: return "reconfigure_service";
    case ActionKind::reconfigure_apps_of_service: return "reconfigure_apps_of_service";
    case ActionKind::reinitiate_apps: return "reinitiate_apps";
    case ActionKind::restart_service: return "restart_service";
    case ActionKind::restart_app: return "restart_app";
    case ActionKind::migrate_app_vm: return "migrate_app_vm";
    case ActionKind::instantiate_app_vm: return "instantiate_app_vm";
    case ActionKind::augment_vm_resources: return "augment_vm_resources";
    case ActionKind::configure_app: return "configure_app";
    case ActionKind::set_standalone_mode: return "set_standalone_mode";
    case ActionKind::reroute_around_switch: return "reroute_around_switch";
    case ActionKind::failover_controller: return "failover_controller";
    case ActionKind::reconfigure_bridge: return "reconfigure_bridge";
    case ActionKind::reduce_uplink_power: return "reduce_uplink_power";
    case ActionKind::reconfigure_client_app: return "reconfigure_client_app";
    case ActionKind::install_client_flow: return "install_client_flow";
  }
  return "?";
}

std::string_view to_string(Channel channel) {
  switch (channel) {
    case Channel::service_reconfig: return "service_reconfig";
    case Channel::app_orchestration: return "app_orchestration";
    case Channel::controller_programming: return "controller_programming";
    case Channel::direct_data_plane: return "direct_data_plane";
  }
  return "?";
}

const std::vector<CatalogRow>& catalog() {
  using A = ActionKind;
  static const std::vector<CatalogRow> rows = {
      {Plane::service, CauseKind::service_misconfiguration, {A::reconfigure_service, A::reconfigure_apps_of_service}},
      {Plane::service, CauseKind::service_crash, {A::reinitiate_apps, A::restart_service}},
      {Plane::application, CauseKind::app_crash, {A::restart_app, A::migrate_app_vm}},
      {Plane::application, CauseKind::app_too_many_requests, {A::instantiate_app_vm, A::augment_vm_resources}},
      {Plane::application, CauseKind::app_misconfiguration, {A::configure_app}},
      {Plane::control, CauseKind::control_link_failure_in_band, {A::set_standalone_mode, A::reroute_around_switch}},
      {Plane::control, CauseKind::control_link_failure_out_of_band, {A::set_standalone_mode}},
      {Plane::control, CauseKind::controller_failure, {A::failover_controller}},
      {Plane::data, CauseKind::bridge_misconfigured, {A::reconfigure_bridge}},
      {Plane::data, CauseKind::high_interference, {A::reduce_uplink_power}},
      {Plane::data, CauseKind::client_app_misconfiguration, {A::reconfigure_client_app}},
      {Plane::data, CauseKind::switch_missing_client_flow, {A::install_client_flow}},
  };
  return rows;
}

const CatalogRow& catalog_row(CauseKind cause) {
  for (const CatalogRow& row : catalog()) {
    if (row.cause == cause) return row;
  }
  throw InvariantError("cause kind missing from recovery catalog");
}

namespace {

Channel channel_of(ActionKind kind) {
  switch (kind) {
    case ActionKind::reconfigure_service:
    case ActionKind::restart_service:
    case ActionKind::reconfigure_client_app:
      return Channel::service_reconfig;
    case ActionKind::reconfigure_apps_of_service:
    case ActionKind::reinitiate_apps:
    case ActionKind::restart_app:
    case ActionKind::migrate_app_vm:
    case ActionKind::instantiate_app_vm:
    case ActionKind::augment_vm_resources:
    case ActionKind::configure_app:
      return Channel::app_orchestration;
    case ActionKind::reroute_around_switch:
    case ActionKind::failover_controller:
    case ActionKind::install_client_flow:
      return Channel::controller_programming;
    case ActionKind::set_standalone_mode:
    case ActionKind::reconfigure_bridge:
    case ActionKind::reduce_uplink_power:
      return Channel::direct_data_plane;
  }
  return Channel::direct_data_plane;
}

/// The controller can program a client's first hop only over a control path.
bool controller_reaches_first_hop(const net::Topology& t, const NodeId& client) {
  auto hop = service::first_hop(t, client);
  if (!hop) return false;
  return net::control_path(t, hop->switch_id).has_value();
}

bool target_exists(const service::Network& net, const RootCause& c) {
  switch (c.kind) {
    case CauseKind::service_misconfiguration:
    case CauseKind::service_crash:
      return net.inventory.find_service(c.target) != nullptr;
    case CauseKind::app_crash:
    case CauseKind::app_too_many_requests:
    case CauseKind::app_misconfiguration:
      return net.inventory.find_workload(c.target) != nullptr;
    case CauseKind::control_link_failure_in_band:
    case CauseKind::control_link_failure_out_of_band:
      return net.topology.find_link(LinkId(c.target)) || net.topology.find_node(NodeId(c.target));
    default:
      return net.topology.find_node(NodeId(c.target)) != nullptr;
  }
}

std::vector<std::string> workloads_of(const service::Network& net, const service::Service& s) {
  std::vector<std::string> groups = s.forwarding_graph;
  groups.insert(groups.end(), s.apps.begin(), s.apps.end());
  std::vector<std::string> out;
  for (const std::string& g : groups) {
    if (!net.inventory.find_workload(g)) continue;
    for (const service::Workload* w : net.inventory.group_of(g)) out.push_back(w->id);
  }
  return out;
}

/// Up, secure switches that lost their controller.
std::vector<NodeId> cut_off_switches(const net::Topology& t) {
  std::vector<NodeId> out;
  net::ControlView view(t);
  for (const net::Node& n : t.nodes()) {
    if (n.is_switch() && n.is_up() && n.switch_mode == net::SwitchMode::secure && !view.connected(n.id)) {
      out.push_back(n.id);
    }
  }
  return out;
}

void reallocate_app_paths(service::Network& net) {
  std::vector<std::string> apps;
  for (const service::Workload& w : net.inventory.workloads()) {
    if (w.kind == service::WorkloadKind::app) apps.push_back(w.id);
  }
  for (const std::string& a : apps) service::allocate_app_path(net, a);
}

void reinstall_delivery_rules(service::Network& net) {
  for (const service::Service& s : net.inventory.services()) {
    for (const NodeId& user : s.users) {
      if (!net.topology.find_node(user)) continue;
      auto by = controller_reaches_first_hop(net.topology, user) ? net::Installer::controller
                                                                 : net::Installer::self_healer;
      service::install_delivery_rule(net.topology, s.id, user, by);
    }
  }
}

/// Applies one action; returns a short note for the log record.
std::string apply(const RecoveryAction& a, service::Network& net, const Settings& settings) {
  net::Topology& t = net.topology;
  service::Inventory& inv = net.inventory;
  switch (a.kind) {
    case ActionKind::reconfigure_service: {
      service::Service& s = inv.service(a.target);
      s.config_version = s.declared_config_version;
      return "config_version=" + std::to_string(s.config_version);
    }
    case ActionKind::reconfigure_apps_of_service:
    case ActionKind::reinitiate_apps: {
      int restarted = 0;
      for (const std::string& w : workloads_of(net, inv.service(a.target))) {
        const service::Workload& wl = inv.workload(w);
        bool needs = a.kind == ActionKind::reinitiate_apps || !wl.is_running();
        if (needs && service::restart_workload(net, w)) ++restarted;
      }
      return "restarted=" + std::to_string(restarted);
    }
    case ActionKind::restart_service: {
      service::Service& s = inv.service(a.target);
      s.crashed = false;
      return "";
    }
    case ActionKind::restart_app:
      return service::restart_workload(net, a.target) ? "" : "host down";
    case ActionKind::migrate_app_vm: {
      const service::Workload& w = inv.workload(a.target);
      auto host = service::first_fit_host(net, w.cpu, w.mem, w.host);
      if (!host) throw UnrecoverableError("no spare vm host for " + a.target);
      service::migrate_workload(net, a.target, *host);
      service::restart_workload(net, a.target);
      return "to " + host->str();
    }
    case ActionKind::instantiate_app_vm: {
      try {
        return "replica " + service::scale_out(net, a.target);
      } catch (const CapacityError& e) {
        throw UnrecoverableError(e.what());
      }
    }
    case ActionKind::augment_vm_resources: {
      try {
        return "capacity=" + monitoring::format_value(service::scale_up(net, a.target));
      } catch (const CapacityError& e) {
        throw UnrecoverableError(e.what());
      }
    }
    case ActionKind::configure_app: {
      service::Workload& w = inv.workload(a.target);
      if (!t.node(w.host).is_up()) return "host down";
      w.config_version = 1;
      if (w.status == service::WorkloadStatus::misconfigured) w.status = service::WorkloadStatus::running;
      return "";
    }
    case ActionKind::set_standalone_mode: {
      std::string note;
      for (const NodeId& sw : cut_off_switches(t)) {
        t.set_switch_mode(sw, net::SwitchMode::standalone);
        note += (note.empty() ? "" : ",") + sw.str();
      }
      return note.empty() ? "no switch affected" : note;
    }
    case ActionKind::reroute_around_switch:
      reallocate_app_paths(net);
      reinstall_delivery_rules(net);
      return "";
    case ActionKind::failover_controller: {
      if (t.active_controller().str() != a.target) return "not active";
      auto next = t.fail_over();
      if (!next) throw UnrecoverableError("no backup controller up");
      reallocate_app_paths(net);
      return "to " + next->str();
    }
    case ActionKind::reconfigure_bridge:
      if (t.node(NodeId(a.target)).status == net::NodeStatus::misconfigured) {
        t.set_node_status(NodeId(a.target), net::NodeStatus::up);
      }
      return "";
    case ActionKind::reduce_uplink_power: {
      const NodeId ap(a.target);
      double power = t.node(ap).uplink_power.value_or(0);
      while (power > settings.thresholds.interference_ceiling) {
        power = std::max(0.0, power - settings.power_step);
        t.set_uplink_power(ap, power);
      }
      return "power=" + monitoring::format_value(power);
    }
    case ActionKind::reconfigure_client_app:
      if (t.node(NodeId(a.target)).status == net::NodeStatus::misconfigured) {
        t.set_node_status(NodeId(a.target), net::NodeStatus::up);
      }
      return "";
    case ActionKind::install_client_flow: {
      const NodeId client(a.target);
      auto by = a.channel == Channel::controller_programming ? net::Installer::controller
                                                             : net::Installer::self_healer;
      int installed = 0;
      for (const service::Service& s : inv.services()) {
        if (std::find(s.users.begin(), s.users.end(), client) == s.users.end()) continue;
        installed += service::install_delivery_rule(t, s.id, client, by) ? 1 : 0;
      }
      return "rules=" + std::to_string(installed);
    }
  }
  return "";
}

}  // namespace

RecoveryPlan plan(const RootCause& cause, const service::Network& net) {
  RecoveryPlan p{cause, {}};
  for (ActionKind kind : catalog_row(cause.kind).actions) {
    Channel channel = channel_of(kind);
    if (kind == ActionKind::install_client_flow && !controller_reaches_first_hop(net.topology, NodeId(cause.target))) {
      channel = Channel::direct_data_plane;
    }
    p.actions.push_back(RecoveryAction{kind, cause.target, channel});
  }
  return p;
}

std::set<SymptomKey> residual_symptoms(const service::Network& net, const RootCause& cause) {
  std::set<SymptomKey> out;
  const net::Topology& t = net.topology;
  switch (cause.kind) {
    case CauseKind::control_link_failure_in_band:
      if (t.find_link(LinkId(cause.target))) out.insert({SymptomKind::data_link_down, cause.target});
      else out.insert({SymptomKind::switch_down, cause.target});
      break;
    case CauseKind::control_link_failure_out_of_band:
      out.insert({SymptomKind::control_link_down, cause.target});
      break;
    case CauseKind::controller_failure:
      out.insert({SymptomKind::controller_down, cause.target});
      break;
    default:
      break;
  }
  for (const net::Node& n : t.nodes()) {
    if (n.is_switch() && n.switch_mode == net::SwitchMode::standalone) {
      out.insert({SymptomKind::control_path_lost, n.id.str()});
    }
  }
  return out;
}

Verdict verify(const service::Network& net, const RootCause& cause, const diagnosis::Model& model,
               const MetricThresholds& th) {
  monitoring::SymptomSet now = monitoring::collect(net, th);
  std::set<SymptomKey> residual = residual_symptoms(net, cause);
  for (const diagnosis::Effect& e : model.effects(cause)) {
    if (now.contains(e.symptom) && !residual.contains(e.symptom)) return Verdict::not_recovered;
  }
  return Verdict::recovered;
}

ExecutionResult execute(const RecoveryPlan& p, service::Network& net, const diagnosis::Model& model,
                        const Settings& settings) {
  if (!target_exists(net, p.cause)) throw StalePlanError("recovery target vanished: " + p.cause.str());
  ExecutionResult result;
  bool short_of_spares = false;
  for (const RecoveryAction& a : p.actions) {
    ActionRecord rec{a, false, ""};
    try {
      rec.note = apply(a, net, settings);
      rec.ok = verify(net, p.cause, model, settings.thresholds) == Verdict::recovered;
    } catch (const UnrecoverableError& e) {
      rec.note = e.what();
      short_of_spares = true;
    }
    result.log.push_back(rec);
    if (rec.ok) {
      result.recovered = true;
      break;
    }
  }
  result.unrecoverable = !result.recovered && short_of_spares;
  return result;
}

std::string format_action(int tick, const RootCause& cause, const ActionRecord& r) {
  return "TICK " + std::to_string(tick) + " RECOVER " + std::string(diagnosis::to_string(cause.kind)) + " " +
         cause.target + " ACTION " + std::string(to_string(r.action.kind)) + " " +
         std::string(to_string(r.action.channel)) + " " + (r.ok ? "ok" : "fail");
}

}  // namespace healnet::recovery
