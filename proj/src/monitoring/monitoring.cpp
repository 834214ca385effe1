#include <algorithm>
#include <cstdio>
#include <sstream>

#include "healnet/monitoring.hpp"

namespace healnet::monitoring {

using net::NodeKind;
using net::NodeStatus;
using service::WorkloadKind;
using service::WorkloadStatus;

std::string_view to_string(Plane plane) {
  switch (plane) {
    case Plane::service: return "service";
    case Plane::application: return "application";
    case Plane::control: return "control";
    case Plane::data: return "data";
  }
  return "?";
}

std::string_view to_string(SymptomKind kind) {
  switch (kind) {
    case SymptomKind::service_down: return "service_down";
    case SymptomKind::service_misconfig: return "service_misconfig";
    case SymptomKind::app_crashed: return "app_crashed";
    case SymptomKind::app_overloaded: return "app_overloaded";
    case SymptomKind::app_misconfig: return "app_misconfig";
    case SymptomKind::app_path_lost: return "app_path_lost";
    case SymptomKind::controller_down: return "controller_down";
    case SymptomKind::control_link_down: return "control_link_down";
    case SymptomKind::control_path_lost: return "control_path_lost";
    case SymptomKind::controller_reply_rate_low: return "controller_reply_rate_low";
    case SymptomKind::switch_down: return "switch_down";
    case SymptomKind::data_link_down: return "data_link_down";
    case SymptomKind::rule_missing: return "rule_missing";
    case SymptomKind::bridge_misconfig: return "bridge_misconfig";
    case SymptomKind::interference_high: return "interference_high";
    case SymptomKind::client_misconfig: return "client_misconfig";
    case SymptomKind::client_unreachable: return "client_unreachable";
    case SymptomKind::metric_delay_high: return "metric_delay_high";
    case SymptomKind::metric_jitter_high: return "metric_jitter_high";
    case SymptomKind::metric_throughput_low: return "metric_throughput_low";
  }
  return "?";
}

std::string_view to_string(Severity severity) {
  return severity == Severity::broken ? "broken" : "degraded";
}

std::optional<SymptomKind> parse_symptom_kind(std::string_view text) {
  for (SymptomKind k : kAllSymptomKinds) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

Severity severity_of(SymptomKind kind) {
  switch (kind) {
    case SymptomKind::app_overloaded:
    case SymptomKind::controller_reply_rate_low:
    case SymptomKind::interference_high:
    case SymptomKind::metric_delay_high:
    case SymptomKind::metric_jitter_high:
    case SymptomKind::metric_throughput_low:
      return Severity::degraded;
    default:
      return Severity::broken;
  }
}

Plane plane_of(SymptomKind kind) {
  switch (kind) {
    case SymptomKind::service_down:
    case SymptomKind::service_misconfig:
    case SymptomKind::metric_delay_high:
    case SymptomKind::metric_jitter_high:
    case SymptomKind::metric_throughput_low:
      return Plane::service;
    case SymptomKind::app_crashed:
    case SymptomKind::app_overloaded:
    case SymptomKind::app_misconfig:
    case SymptomKind::app_path_lost:
      return Plane::application;
    case SymptomKind::controller_down:
    case SymptomKind::control_link_down:
    case SymptomKind::control_path_lost:
    case SymptomKind::controller_reply_rate_low:
      return Plane::control;
    default:
      return Plane::data;
  }
}

std::string SymptomKey::str() const { return std::string(to_string(kind)) + "/" + source; }

Symptom make_symptom(SymptomKind kind, std::string source, int tick, std::optional<double> value) {
  return Symptom{plane_of(kind), std::move(source), kind, severity_of(kind), value, tick};
}

std::string format_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string format_symptom(const Symptom& s) {
  std::string line = "TICK " + std::to_string(s.tick) + " SYMPTOM " + std::string(to_string(s.plane)) +
                     " " + s.source + " " + std::string(to_string(s.kind)) + " " +
                     std::string(to_string(s.severity));
  if (s.value) line += " " + format_value(*s.value);
  return line;
}

namespace {

std::string join(const std::vector<std::string>& parts, char sep = ',') {
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out += sep;
    out += p;
  }
  return out;
}

bool path_intact(const net::Topology& t, const NodeId& from, const net::Path& path) {
  for (const LinkId& id : path) {
    const net::Link* l = t.find_link(id);
    if (!l || !l->is_up()) return false;
  }
  for (const NodeId& n : net::path_nodes(t, from, path)) {
    if (t.node(n).status == NodeStatus::crashed) return false;
  }
  return true;
}

}  // namespace

PlaneReport poll_service_plane(const service::Network& net, const MetricThresholds& th, int tick) {
  PlaneReport r;
  for (const service::Service& s : net.inventory.services()) {
    service::ServiceHealth h = service::assess_service(net, s, th);
    if (h.status != service::ServiceStatus::failed) {
      std::vector<std::string> users;
      for (const NodeId& u : s.users) users.push_back(u.str());
      r.listing.push_back("service " + s.id + " running users=" + join(users) +
                          " fg=" + join(s.forwarding_graph));
    }
    if (s.misconfigured()) r.symptoms.push_back(make_symptom(SymptomKind::service_misconfig, s.id, tick));
    if (h.status == service::ServiceStatus::failed) {
      r.symptoms.push_back(make_symptom(SymptomKind::service_down, s.id, tick));
      continue;
    }
    if (h.delay_high) r.symptoms.push_back(make_symptom(SymptomKind::metric_delay_high, s.id, tick, h.worst_delay));
    if (h.jitter_high) r.symptoms.push_back(make_symptom(SymptomKind::metric_jitter_high, s.id, tick, h.worst_jitter));
    if (h.throughput_low) {
      r.symptoms.push_back(make_symptom(SymptomKind::metric_throughput_low, s.id, tick, h.worst_throughput));
    }
  }
  return r;
}

PlaneReport poll_application_plane(const service::Network& net, const MetricThresholds& th, int tick) {
  PlaneReport r;
  const net::Topology& t = net.topology;
  for (const service::Workload& w : net.inventory.workloads()) {
    r.listing.push_back(std::string(service::to_string(w.kind)) + " " + w.id + " on " + w.host.str() +
                        " " + std::string(service::to_string(w.status)));
    switch (w.status) {
      case WorkloadStatus::crashed:
        r.symptoms.push_back(make_symptom(SymptomKind::app_crashed, w.id, tick));
        continue;
      case WorkloadStatus::misconfigured:
        r.symptoms.push_back(make_symptom(SymptomKind::app_misconfig, w.id, tick));
        break;
      case WorkloadStatus::running:
        break;
    }
    if (w.load > w.capacity * th.load_factor_ceiling) {
      r.symptoms.push_back(make_symptom(SymptomKind::app_overloaded, w.id, tick, w.load));
    }
    if (w.kind == WorkloadKind::app) {
      bool lost = !w.allocated_path || !t.find_node(w.host) || !path_intact(t, w.host, *w.allocated_path) ||
                  t.node(t.active_controller()).status == NodeStatus::crashed;
      if (lost) r.symptoms.push_back(make_symptom(SymptomKind::app_path_lost, w.id, tick));
    }
  }
  return r;
}

double controller_reply_rate(const net::Topology& t) {
  const net::Node& ctrl = t.node(t.active_controller());
  double demand = 0.0;
  for (const net::Node& n : t.nodes()) {
    if (n.is_switch() && n.status != NodeStatus::crashed) demand += n.request_rate;
  }
  if (demand <= 0.0) return 1.0;
  return std::min(1.0, ctrl.request_capacity / demand);
}

PlaneReport poll_control_plane(const service::Network& net, const MetricThresholds& th, int tick) {
  PlaneReport r;
  const net::Topology& t = net.topology;
  for (const NodeId& c : t.controllers()) {
    if (t.node(c).status == NodeStatus::crashed) {
      r.symptoms.push_back(make_symptom(SymptomKind::controller_down, c.str(), tick));
    }
  }
  const net::Node& active = t.node(t.active_controller());
  if (active.status != NodeStatus::crashed) {
    double rate = controller_reply_rate(t);
    if (rate < th.controller_reply_rate_floor) {
      r.symptoms.push_back(make_symptom(SymptomKind::controller_reply_rate_low, active.id.str(), tick, rate));
    }
  }
  for (const net::Link& l : t.links()) {
    if (l.kind == net::LinkKind::control && !l.is_up()) {
      r.symptoms.push_back(make_symptom(SymptomKind::control_link_down, l.id.str(), tick));
    }
  }
  net::ControlView control(t);
  for (const net::Node& n : t.nodes()) {
    if (!n.is_switch() || n.status == NodeStatus::crashed) continue;
    const auto& path = control.path(n.id);
    if (!path) {
      r.symptoms.push_back(make_symptom(SymptomKind::control_path_lost, n.id.str(), tick));
      r.listing.push_back("switch " + n.id.str() + " unmanaged");
    } else {
      r.listing.push_back("switch " + n.id.str() + " managed by " + active.id.str());
    }
  }
  return r;
}

PlaneReport poll_data_plane(const service::Network& net, const MetricThresholds& th, int tick) {
  PlaneReport r;
  const net::Topology& t = net.topology;
  for (const net::Node& n : t.nodes()) {
    if (n.is_switch()) {
      std::size_t rules = 0;
      for (const auto& [key, rule] : t.rules()) rules += key.first == n.id ? 1 : 0;
      r.listing.push_back("switch " + n.id.str() + " mode=" + std::string(net::to_string(*n.switch_mode)) +
                          " rules=" + std::to_string(rules));
      if (n.status == NodeStatus::crashed) r.symptoms.push_back(make_symptom(SymptomKind::switch_down, n.id.str(), tick));
      if (n.status == NodeStatus::misconfigured) {
        r.symptoms.push_back(make_symptom(SymptomKind::bridge_misconfig, n.id.str(), tick));
      }
    } else if (n.kind == NodeKind::access_point) {
      if (n.uplink_power.value_or(0) > th.interference_ceiling) {
        r.symptoms.push_back(make_symptom(SymptomKind::interference_high, n.id.str(), tick, *n.uplink_power));
      }
    } else if (n.kind == NodeKind::client) {
      if (n.status == NodeStatus::misconfigured) {
        r.symptoms.push_back(make_symptom(SymptomKind::client_misconfig, n.id.str(), tick));
      }
    } else if (n.kind == NodeKind::host || n.kind == NodeKind::server || n.kind == NodeKind::vm_host) {
      r.listing.push_back(std::string(net::to_string(n.kind)) + " " + n.id.str() + " " +
                          std::string(net::to_string(n.status)));
    }
  }
  for (const net::Link& l : t.links()) {
    if (l.kind == net::LinkKind::data && !l.is_up()) {
      r.symptoms.push_back(make_symptom(SymptomKind::data_link_down, l.id.str(), tick));
    }
  }
  for (const service::Service& s : net.inventory.services()) {
    auto st = service::derive_service_topology(net, s);
    for (const auto& [user, reachable] : service::user_reachability(net, s, st)) {
      if (reachable) continue;
      auto hop = service::first_hop(t, user);
      bool rule_present = hop && t.find_rule(hop->switch_id, service::delivery_match(s.id, user));
      if (!rule_present) r.symptoms.push_back(make_symptom(SymptomKind::rule_missing, user.str(), tick));
      r.symptoms.push_back(make_symptom(SymptomKind::client_unreachable, user.str(), tick));
    }
  }
  return r;
}

SymptomSet::SymptomSet(std::vector<Symptom> symptoms) : items_(std::move(symptoms)) {
  auto order = [](const Symptom& a, const Symptom& b) {
    return std::tie(a.plane, a.source, a.kind) < std::tie(b.plane, b.source, b.kind);
  };
  std::stable_sort(items_.begin(), items_.end(), order);
  auto same = [](const Symptom& a, const Symptom& b) { return a.plane == b.plane && a.source == b.source && a.kind == b.kind; };
  items_.erase(std::unique(items_.begin(), items_.end(), same), items_.end());
}

const Symptom* SymptomSet::find(const SymptomKey& key) const {
  for (const Symptom& s : items_) {
    if (s.kind == key.kind && s.source == key.source) return &s;
  }
  return nullptr;
}

bool SymptomSet::any_broken() const {
  return std::any_of(items_.begin(), items_.end(), [](const Symptom& s) { return s.broken(); });
}

SymptomSet collect(const service::Network& net, const MetricThresholds& th, int tick) {
  std::vector<Symptom> all;
  for (auto poll : {poll_service_plane, poll_application_plane, poll_control_plane, poll_data_plane}) {
    PlaneReport r = poll(net, th, tick);
    all.insert(all.end(), std::make_move_iterator(r.symptoms.begin()),
               std::make_move_iterator(r.symptoms.end()));
  }
  return SymptomSet(std::move(all));
}

}  // namespace healnet::monitoring
