#include <algorithm>
#include <cstdio>

#include "healnet/diagnosis.hpp"

namespace healnet::diagnosis {

using monitoring::SymptomKey;
using monitoring::SymptomKind;
using net::NodeKind;

std::string_view to_string(CauseKind kind) {
  switch (kind) {
    case CauseKind::service_misconfiguration: return "service_misconfiguration";
    case CauseKind::service_crash: return "service_crash";
    case CauseKind::app_crash: return "app_crash";
    case CauseKind::app_too_many_requests: return "app_too_many_requests";
    case CauseKind::app_misconfiguration: return "app_misconfiguration";
    case CauseKind::control_link_failure_in_band: return "control_link_failure_in_band";
    case CauseKind::control_link_failure_out_of_band: return "control_link_failure_out_of_band";
    case CauseKind::controller_failure: return "controller_failure";
    case CauseKind::bridge_misconfigured: return "bridge_misconfigured";
    case CauseKind::high_interference: return "high_interference";
    case CauseKind::client_app_misconfiguration: return "client_app_misconfiguration";
    case CauseKind::switch_missing_client_flow: return "switch_missing_client_flow";
  }
  return "?";
}

std::optional<CauseKind> parse_cause_kind(std::string_view text) {
  for (CauseKind k : kAllCauseKinds) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

std::string RootCause::str() const { return std::string(to_string(kind)) + "/" + target; }

std::optional<std::size_t> Model::find_cause(const RootCause& c) const {
  return network_.find_cause(c.str());
}

bool Model::has_symptom(const SymptomKey& key) const {
  return network_.find_symptom(key.str()).has_value();
}

std::vector<Effect> Model::effects(const RootCause& c) const {
  auto it = effects_.find(c);
  return it == effects_.end() ? std::vector<Effect>{} : it->second;
}

std::vector<RootCause> Model::explanations(const SymptomKey& key) const {
  std::vector<RootCause> out;
  auto idx = network_.find_symptom(key.str());
  if (!idx) return out;
  for (const bayes::ParentLink& p : network_.symptoms()[*idx].parents) out.push_back(causes_[p.cause]);
  return out;
}

namespace {

using Elements = std::set<std::string>;

void add_path(const net::Topology& t, const NodeId& from, const net::Path& path, Elements& out) {
  for (const NodeId& n : net::path_nodes(t, from, path)) out.insert(n.str());
  for (const LinkId& l : path) out.insert(l.str());
}

/// What each dependent thing needs from the network in the healthy state:
/// every node and link whose failure can take it down.
struct Footprints {
  std::map<std::string, Elements> control;   // switch -> its control path (switch itself excluded)
  std::map<std::string, Elements> service;   // service -> topology + control of its secure switches
  std::map<std::string, Elements> delivery;  // client -> delivery paths over all its services
  std::map<std::string, Elements> app;       // app -> northbound path
  std::map<std::string, std::set<std::string>> transit_switches;  // client -> switches needing control
};

bool secure_switch(const net::Node& n) {
  return n.is_switch() && n.switch_mode == net::SwitchMode::secure;
}

Footprints footprints(const Snapshot& snap) {
  const net::Topology& t = snap.topology();
  const service::Inventory& inv = snap.inventory();
  Footprints f;
  net::ControlView view(t);
  for (const net::Node& n : t.nodes()) {
    if (!n.is_switch()) continue;
    Elements& e = f.control[n.id.str()];
    if (const auto& path = view.path(n.id)) add_path(t, n.id, *path, e);
    e.erase(n.id.str());
  }
  auto with_control = [&](const std::string& sw, Elements& e) {
    auto it = f.control.find(sw);
    if (it != f.control.end()) e.insert(it->second.begin(), it->second.end());
  };

  for (const auto& [id, st] : snap.service_topologies()) {
    Elements& e = f.service[id];
    if (!st) continue;
    for (const NodeId& n : st->nodes) {
      e.insert(n.str());
      if (secure_switch(t.node(n))) with_control(n.str(), e);
    }
    for (const LinkId& l : st->links) e.insert(l.str());

    const service::Service& s = inv.service(id);
    for (const auto& [user, path] : st->user_paths) {
      Elements& d = f.delivery[user.str()];
      add_path(t, s.server, path, d);
      auto hop = service::first_hop(t, user);
      for (const NodeId& n : net::path_nodes(t, s.server, path)) {
        if (!secure_switch(t.node(n)) || (hop && hop->switch_id == n)) continue;
        with_control(n.str(), d);
        f.transit_switches[user.str()].insert(n.str());
      }
    }
  }
  for (const service::Workload& w : inv.workloads()) {
    if (w.kind != service::WorkloadKind::app || !w.allocated_path) continue;
    add_path(t, w.host, *w.allocated_path, f.app[w.id]);
  }
  return f;
}

class Builder {
 public:
  explicit Builder(const ModelParams& p) : params_(p) {}

  void symptom(SymptomKind kind, const std::string& source) {
    SymptomKey key{kind, source};
    if (net_.find_symptom(key.str())) return;
    net_.add_symptom(key.str(), params_.leak);
    keys_.push_back(key);
  }

  void cause(CauseKind kind, const std::string& target) {
    RootCause c{kind, target};
    current_ = net_.add_cause(c.str(), params_.prior);
    causes_.push_back(c);
    effects_[c];
  }

  void direct(SymptomKind kind, const std::string& source) { edge(kind, source, true); }
  void propagated(SymptomKind kind, const std::string& source) { edge(kind, source, false); }

  bayes::NoisyOrNetwork net_;
  std::vector<RootCause> causes_;
  std::vector<SymptomKey> keys_;
  std::map<RootCause, std::vector<Effect>> effects_;

 private:
  void edge(SymptomKind kind, const std::string& source, bool is_direct) {
    SymptomKey key{kind, source};
    auto s = net_.find_symptom(key.str());
    if (!s) return;  // the entity cannot show this symptom
    net_.link(current_, *s, is_direct ? params_.link_direct : params_.link_propagated);
    auto& list = effects_[causes_.back()];
    auto it = std::find_if(list.begin(), list.end(), [&](const Effect& e) { return e.symptom == key; });
    if (it == list.end()) list.push_back(Effect{key, is_direct});
    else it->direct = it->direct || is_direct;
  }

  ModelParams params_;
  std::size_t current_ = 0;
};

}  // namespace

Model build_model(const Snapshot& snap, const ModelParams& params) {
  const net::Topology& t = snap.topology();
  const service::Inventory& inv = snap.inventory();
  const Footprints f = footprints(snap);
  Builder b(params);

  // Symptom nodes, one per code an entity can raise.
  for (const service::Service& s : inv.services()) {
    for (SymptomKind k : {SymptomKind::service_down, SymptomKind::service_misconfig, SymptomKind::metric_delay_high,
                          SymptomKind::metric_jitter_high, SymptomKind::metric_throughput_low}) {
      b.symptom(k, s.id);
    }
  }
  for (const service::Workload& w : inv.workloads()) {
    b.symptom(SymptomKind::app_crashed, w.id);
    b.symptom(SymptomKind::app_overloaded, w.id);
    b.symptom(SymptomKind::app_misconfig, w.id);
    if (w.kind == service::WorkloadKind::app) b.symptom(SymptomKind::app_path_lost, w.id);
  }
  for (const net::Node& n : t.nodes()) {
    const std::string& id = n.id.str();
    switch (n.kind) {
      case NodeKind::controller:
        b.symptom(SymptomKind::controller_down, id);
        b.symptom(SymptomKind::controller_reply_rate_low, id);
        break;
      case NodeKind::switch_node:
        b.symptom(SymptomKind::control_path_lost, id);
        b.symptom(SymptomKind::switch_down, id);
        b.symptom(SymptomKind::bridge_misconfig, id);
        break;
      case NodeKind::access_point:
        b.symptom(SymptomKind::interference_high, id);
        break;
      case NodeKind::client:
        b.symptom(SymptomKind::client_misconfig, id);
        b.symptom(SymptomKind::rule_missing, id);
        b.symptom(SymptomKind::client_unreachable, id);
        break;
      default:
        break;
    }
  }
  for (const net::Link& l : t.links()) {
    b.symptom(l.kind == net::LinkKind::data ? SymptomKind::data_link_down : SymptomKind::control_link_down,
              l.id.str());
  }

  // Without a service topology no user is reachable, so whatever cuts the
  // chain also takes the users down.
  auto breaks_chain = [&](const std::string& sid) {
    b.propagated(SymptomKind::service_down, sid);
    const auto& st = snap.service_topologies().at(sid);
    if (!st) return;
    for (const auto& [user, path] : st->user_paths) b.propagated(SymptomKind::client_unreachable, user.str());
  };

  auto services_depending_on = [&](const std::string& element, auto&& fn) {
    for (const service::Service& s : inv.services()) {
      if (f.service.at(s.id).contains(element)) fn(s);
    }
  };

  // Service plane.
  for (const service::Service& s : inv.services()) {
    b.cause(CauseKind::service_misconfiguration, s.id);
    b.direct(SymptomKind::service_misconfig, s.id);
    b.direct(SymptomKind::service_down, s.id);
    b.cause(CauseKind::service_crash, s.id);
    b.direct(SymptomKind::service_down, s.id);
  }

  // Application plane: VNFs and SDN applications alike.
  for (const service::Workload& w : inv.workloads()) {
    bool sole_member = inv.group_of(w.id).size() == 1;
    auto chained_in = [&](const service::Service& s) {
      return std::find(s.forwarding_graph.begin(), s.forwarding_graph.end(), w.id) != s.forwarding_graph.end();
    };
    auto required_by = [&](const service::Service& s) {
      if (w.kind == service::WorkloadKind::vnf) return chained_in(s);
      return sole_member && std::find(s.apps.begin(), s.apps.end(), w.id) != s.apps.end();
    };

    b.cause(CauseKind::app_crash, w.id);
    b.direct(SymptomKind::app_crashed, w.id);
    for (const service::Service& s : inv.services()) {
      if (required_by(s)) b.propagated(SymptomKind::service_down, s.id);
    }

    b.cause(CauseKind::app_too_many_requests, w.id);
    b.direct(SymptomKind::app_overloaded, w.id);
    for (const service::Service* s : inv.services_using(w.id)) {
      b.propagated(SymptomKind::metric_throughput_low, s->id);
    }

    b.cause(CauseKind::app_misconfiguration, w.id);
    b.direct(SymptomKind::app_misconfig, w.id);
    for (const service::Service& s : inv.services()) {
      if (w.kind == service::WorkloadKind::vnf && chained_in(s)) b.propagated(SymptomKind::service_down, s.id);
    }
  }

  // Control plane.
  auto depends_on = [&](const std::string& element) {
    for (const auto& [sw, e] : f.control) {
      if (e.contains(element)) b.propagated(SymptomKind::control_path_lost, sw);
    }
    services_depending_on(element, [&](const service::Service& s) { breaks_chain(s.id); });
    for (const auto& [client, e] : f.delivery) {
      if (e.contains(element)) b.propagated(SymptomKind::client_unreachable, client);
    }
    for (const auto& [app, e] : f.app) {
      if (e.contains(element)) b.propagated(SymptomKind::app_path_lost, app);
    }
  };

  if (t.mode() == net::ControlMode::in_band) {
    // Control traffic rides the data plane: any data link or switch may be
    // the element that cut a switch off its controller.
    for (const net::Link& l : t.links()) {
      if (l.kind != net::LinkKind::data) continue;
      b.cause(CauseKind::control_link_failure_in_band, l.id.str());
      b.direct(SymptomKind::data_link_down, l.id.str());
      depends_on(l.id.str());
    }
    for (const net::Node& n : t.nodes()) {
      if (!n.is_switch()) continue;
      b.cause(CauseKind::control_link_failure_in_band, n.id.str());
      b.direct(SymptomKind::switch_down, n.id.str());
      depends_on(n.id.str());
    }
  } else {
    for (const net::Link& l : t.links()) {
      if (l.kind != net::LinkKind::control) continue;
      const NodeId& sw = t.node(l.a).is_switch() ? l.a : l.b;
      b.cause(CauseKind::control_link_failure_out_of_band, l.id.str());
      b.direct(SymptomKind::control_link_down, l.id.str());
      b.direct(SymptomKind::control_path_lost, sw.str());
      if (!secure_switch(t.node(sw))) continue;
      for (const auto& [id, st] : snap.service_topologies()) {
        if (st && st->nodes.contains(sw)) breaks_chain(id);
      }
      for (const auto& [client, switches] : f.transit_switches) {
        if (switches.contains(sw.str())) b.propagated(SymptomKind::client_unreachable, client);
      }
    }
  }

  const NodeId& active = t.active_controller();
  for (const NodeId& c : t.controllers()) {
    b.cause(CauseKind::controller_failure, c.str());
    b.direct(SymptomKind::controller_down, c.str());
    if (c != active) continue;
    b.direct(SymptomKind::controller_reply_rate_low, c.str());
    for (const auto& [sw, e] : f.control) b.propagated(SymptomKind::control_path_lost, sw);
    for (const auto& [id, st] : snap.service_topologies()) {
      if (!st) continue;
      bool needs_control = std::any_of(st->nodes.begin(), st->nodes.end(),
                                       [&](const NodeId& n) { return secure_switch(t.node(n)); });
      if (needs_control) breaks_chain(id);
    }
    for (const auto& [client, switches] : f.transit_switches) {
      if (!switches.empty()) b.propagated(SymptomKind::client_unreachable, client);
    }
    for (const auto& [app, e] : f.app) b.propagated(SymptomKind::app_path_lost, app);
  }

  // Data plane.
  for (const net::Node& n : t.nodes()) {
    const std::string& id = n.id.str();
    if (n.is_switch()) {
      b.cause(CauseKind::bridge_misconfigured, id);
      b.direct(SymptomKind::bridge_misconfig, id);
      for (const auto& [sid, st] : snap.service_topologies()) {
        if (st && st->nodes.contains(n.id)) breaks_chain(sid);
      }
      for (const auto& [client, e] : f.delivery) {
        if (e.contains(id)) b.propagated(SymptomKind::client_unreachable, client);
      }
    } else if (n.kind == NodeKind::access_point) {
      b.cause(CauseKind::high_interference, id);
      b.direct(SymptomKind::interference_high, id);
      for (const auto& [sid, st] : snap.service_topologies()) {
        if (st && st->nodes.contains(n.id)) b.propagated(SymptomKind::metric_jitter_high, sid);
      }
    } else if (n.kind == NodeKind::client) {
      b.cause(CauseKind::client_app_misconfiguration, id);
      b.direct(SymptomKind::client_misconfig, id);
      b.cause(CauseKind::switch_missing_client_flow, id);
      b.direct(SymptomKind::rule_missing, id);
      b.direct(SymptomKind::client_unreachable, id);
      for (const service::Service& s : inv.services()) {
        if (std::find(s.users.begin(), s.users.end(), n.id) != s.users.end()) {
          b.propagated(SymptomKind::service_down, s.id);
        }
      }
    }
  }

  Model m;
  m.network_ = std::move(b.net_);
  m.causes_ = std::move(b.causes_);
  m.symptoms_ = std::move(b.keys_);
  m.effects_ = std::move(b.effects_);
  m.version_ = snap.version();
  return m;
}

bayes::Evidence correlate(const monitoring::SymptomSet& symptoms, const Model& model,
                          const std::set<SymptomKey>& masked) {
  bayes::Evidence ev;
  for (const SymptomKey& key : model.symptoms()) {
    if (!masked.contains(key)) ev[key.str()] = false;
  }
  for (const monitoring::Symptom& s : symptoms) {
    SymptomKey key = s.key();
    if (!model.has_symptom(key)) {
      throw StaleModelError("no model node for symptom " + key.str() + "; model predates it");
    }
    if (!masked.contains(key)) ev[key.str()] = true;
  }
  return ev;
}

DiagnosisResult infer(const Model& model, const bayes::Evidence& evidence,
                      const bayes::InferenceOptions& options) {
  std::vector<double> post = bayes::posteriors(model.network(), evidence, options);
  DiagnosisResult r;
  r.ranked.reserve(post.size());
  for (std::size_t i = 0; i < post.size(); ++i) r.ranked.push_back(RankedCause{model.causes()[i], post[i]});
  std::stable_sort(r.ranked.begin(), r.ranked.end(), [](const RankedCause& a, const RankedCause& b) {
    if (a.posterior != b.posterior) return a.posterior > b.posterior;
    return a.cause < b.cause;
  });
  return r;
}

std::vector<std::string> format_diagnosis(int tick, const DiagnosisResult& result, std::size_t runners_up) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < result.ranked.size() && i <= runners_up; ++i) {
    const RankedCause& rc = result.ranked[i];
    char p[32];
    std::snprintf(p, sizeof p, "%.6f", rc.posterior);
    out.push_back("TICK " + std::to_string(tick) + " DIAGNOSIS " + std::string(to_string(rc.cause.kind)) + " " +
                  rc.cause.target + " p=" + p);
  }
  return out;
}

}  // namespace healnet::diagnosis
