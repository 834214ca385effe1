#include <algorithm>
#include <cstdio>

#include <json.hpp>

#include "healnet/sim.hpp"

namespace healnet::sim {

using json = nlohmann::ordered_json;
using monitoring::SymptomKey;

std::string_view to_string(FinalStatus status) {
  switch (status) {
    case FinalStatus::all_recovered: return "all_recovered";
    case FinalStatus::human_assistance: return "human_assistance";
    case FinalStatus::unresolved: return "unresolved";
  }
  return "?";
}

int exit_code(FinalStatus status) {
  switch (status) {
    case FinalStatus::all_recovered: return 0;
    case FinalStatus::human_assistance: return 2;
    case FinalStatus::unresolved: return 3;
  }
  return 3;
}

namespace {

std::string tick_prefix(int tick) { return "TICK " + std::to_string(tick) + " "; }

std::string fixed6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

Engine::Engine(const Scenario& scenario)
    : scenario_(scenario),
      net_(scenario.network),
      state_([&] {
        service::provision(net_);
        return diagnosis::make_state(snapshots_.take(net_), scenario.config.bn);
      }()) {
  if (!scenario_.events.empty()) last_event_tick_ = scenario_.events.back().tick;
  for (const std::string& w : scenario_.warnings) add("WARN " + w, json{{"record", "warning"}, {"message", w}}.dump());
  for (const service::Service& s : net_.inventory.services()) {
    service_status_[s.id] = service::ServiceStatus::available;
    report_.timelines[s.id];
  }
}

void Engine::add(const std::string& text, const std::string& js) { report_.records.push_back(Record{text, js}); }

void Engine::apply(const Event& e) {
  net::Topology& t = net_.topology;
  service::Inventory& inv = net_.inventory;
  const auto& a = e.args;
  std::string outcome;

  switch (e.kind) {
    case EventKind::fail_link:
      t.set_link_status(LinkId(a[0]), net::LinkStatus::down);
      break;
    case EventKind::restore_link:
      t.set_link_status(LinkId(a[0]), net::LinkStatus::up);
      break;
    case EventKind::crash_node: {
      const NodeId id(a[0]);
      t.set_node_status(id, net::NodeStatus::crashed);
      auto kind = t.node(id).kind;
      if (kind == net::NodeKind::vm_host || kind == net::NodeKind::server) service::crash_workloads_on(net_, id);
      break;
    }
    case EventKind::restore_node:
      t.set_node_status(NodeId(a[0]), net::NodeStatus::up);
      break;
    case EventKind::crash_app:
    case EventKind::crash_vnf:
      inv.workload(a[0]).status = service::WorkloadStatus::crashed;
      break;
    case EventKind::crash_service:
      inv.service(a[0]).crashed = true;
      break;
    case EventKind::misconfigure:
      if (service::Service* s = inv.find_service(a[0])) {
        s->config_version += 1;
      } else if (service::Workload* w = inv.find_workload(a[0])) {
        w->status = service::WorkloadStatus::misconfigured;
      } else {
        t.set_node_status(NodeId(a[0]), net::NodeStatus::misconfigured);
      }
      break;
    case EventKind::set_metric:
      t.set_link_metric(LinkId(a[0]), *net::parse_link_metric(a[1]), std::stod(a[2]));
      break;
    case EventKind::set_load:
      if (inv.find_workload(a[0])) service::set_group_load(inv, a[0], std::stod(a[1]));
      else t.set_request_rate(NodeId(a[0]), std::stod(a[1]));
      break;
    case EventKind::set_uplink_power:
      t.set_uplink_power(NodeId(a[0]), std::stod(a[1]));
      break;
    case EventKind::remove_flow:
      if (!t.remove_flow(NodeId(a[0]), a[1])) outcome = "absent";
      break;
    case EventKind::migrate_vnf:
      try {
        service::migrate_workload(net_, a[0], NodeId(a[1]));
      } catch (const CapacityError&) {
        outcome = "rejected";
      }
      break;
    case EventKind::client_join: {
      const NodeId client(a[0]);
      const NodeId attach(a[1]);
      std::string link_id = a[0] + "-" + a[1];
      while (t.find_link(LinkId(link_id))) link_id += "'";
      t.attach_node(net::make_node(client, net::NodeKind::client),
                    net::Link{LinkId(link_id), client, attach, net::LinkKind::data, net::LinkStatus::up, {}});
      if (a.size() == 3) {
        service::Service& s = inv.service(a[2]);
        if (std::find(s.users.begin(), s.users.end(), client) == s.users.end()) s.users.push_back(client);
        auto hop = service::first_hop(t, client);
        if (hop && net::control_path(t, hop->switch_id)) {
          service::install_delivery_rule(t, s.id, client, net::Installer::controller);
        } else {
          outcome = "no_controller_rule";
        }
      }
      break;
    }
    case EventKind::client_leave: {
      const NodeId client(a[0]);
      auto hop = service::first_hop(t, client);
      for (service::Service& s : inv.services()) {
        if (hop) t.remove_flow(hop->switch_id, service::delivery_match(s.id, client));
        std::erase(s.users, client);
      }
      t.detach_node(client);
      break;
    }
  }

  std::string text = tick_prefix(tick_) + "EVENT " + std::string(to_string(e.kind));
  for (const std::string& arg : a) text += " " + arg;
  json js{{"tick", tick_}, {"record", "event"}, {"kind", to_string(e.kind)}, {"args", a}};
  if (!outcome.empty()) {
    text += " " + outcome;
    js["outcome"] = outcome;
  }
  add(text, js.dump());
}

void Engine::observe(bool sample) {
  for (const service::Service& s : net_.inventory.services()) {
    service::ServiceHealth h = service::assess_service(net_, s, scenario_.config.thresholds);
    auto& prev = service_status_[s.id];
    ServiceTimeline& tl = report_.timelines[s.id];
    if (h.status != prev) {
      prev = h.status;
      tl.changes.emplace_back(tick_, h.status);
      add(tick_prefix(tick_) + "SERVICE " + s.id + " " + std::string(service::to_string(h.status)),
          json{{"tick", tick_}, {"record", "service"}, {"service", s.id}, {"status", service::to_string(h.status)}}
              .dump());
    }
    if (sample) {
      ++tl.observed;
      if (h.status != service::ServiceStatus::failed) ++tl.up;
    }
    for (const auto& [user, reachable] : service::user_reachability(net_, s, h.topology)) {
      auto [it, fresh] = client_reachable_.try_emplace({s.id, user.str()}, true);
      if (it->second == reachable) continue;
      it->second = reachable;
      const char* state = reachable ? "reachable" : "unreachable";
      add(tick_prefix(tick_) + "CLIENT " + s.id + " " + user.str() + " " + state,
          json{{"tick", tick_}, {"record", "client"}, {"service", s.id}, {"client", user.str()}, {"state", state}}
              .dump());
    }
  }
}

bool Engine::open_symptoms(bool any_severity) const {
  return std::any_of(symptoms_.begin(), symptoms_.end(), [&](const monitoring::Symptom& s) {
    return !acked_.contains(s.key()) && (any_severity || s.broken());
  });
}

void Engine::escalate(const diagnosis::RootCause& cause, std::string_view reason) {
  escalated_.insert(cause);
  escalated_any_ = true;
  add(tick_prefix(tick_) + "ESCALATE " + std::string(diagnosis::to_string(cause.kind)) + " " + cause.target + " " +
          std::string(reason),
      json{{"tick", tick_},
           {"record", "escalate"},
           {"cause", diagnosis::to_string(cause.kind)},
           {"target", cause.target},
           {"reason", reason}}
          .dump());
}

void Engine::control_loop() {
  const Config& cfg = scenario_.config;
  bool retry = retry_;
  retry_ = false;
  acted_ = false;
  bool trigger = open_symptoms(false) || (cfg.proactive && open_symptoms(true));
  if (!trigger) {
    last_evidence_.reset();
    return;
  }

  bayes::Evidence ev;
  try {
    ev = diagnosis::correlate(symptoms_, state_.model, acked_);
  } catch (const diagnosis::StaleModelError&) {
    // Something appeared that the healthy snapshot never knew about; model
    // the present network without promoting it to healthy.
    Snapshot now = snapshots_.take(net_);
    state_.model = diagnosis::build_model(now, state_.params);
    add(tick_prefix(tick_) + "REFRESH rebuilt snapshot=" + std::to_string(now.version()),
        json{{"tick", tick_}, {"record", "refresh"}, {"outcome", "rebuilt"}, {"snapshot", now.version()}}.dump());
    ev = diagnosis::correlate(symptoms_, state_.model, acked_);
  }
  if (last_evidence_ && *last_evidence_ == ev && !retry) return;
  last_evidence_ = ev;

  diagnosis::DiagnosisResult result;
  try {
    result = diagnosis::infer(state_.model, ev);
  } catch (const bayes::ModelTooLargeError& e) {
    add(tick_prefix(tick_) + "WARN " + e.what(), json{{"tick", tick_}, {"record", "warning"}, {"message", e.what()}}.dump());
    return;
  }
  if (result.empty()) return;
  for (std::size_t i = 0; i < result.ranked.size() && i < 5; ++i) {
    const auto& rc = result.ranked[i];
    add(tick_prefix(tick_) + "DIAGNOSIS " + std::string(diagnosis::to_string(rc.cause.kind)) + " " + rc.cause.target +
            " p=" + fixed6(rc.posterior),
        json{{"tick", tick_},
             {"record", "diagnosis"},
             {"rank", i + 1},
             {"cause", diagnosis::to_string(rc.cause.kind)},
             {"target", rc.cause.target},
             {"posterior", std::stod(fixed6(rc.posterior))}}
            .dump());
  }

  // Act only on a cause that directly explains something we see; a cause
  // carried by propagated evidence alone is a guess.
  const diagnosis::RootCause top = result.top().cause;
  bool supported = false;
  for (const diagnosis::Effect& eff : state_.model.effects(top)) {
    const monitoring::Symptom* s = symptoms_.find(eff.symptom);
    if (eff.direct && s && !acked_.contains(eff.symptom) && (s->broken() || cfg.proactive)) supported = true;
  }
  if (!supported || escalated_.contains(top)) return;

  int& attempts = attempts_[top];
  if (attempts >= cfg.max_iters) {
    escalate(top, "retry_limit");
    return;
  }
  ++attempts;
  ++report_.iterations;

  recovery::Settings settings{cfg.thresholds, cfg.power_step};
  recovery::ExecutionResult exec;
  try {
    exec = recovery::execute(recovery::plan(top, net_), net_, state_.model, settings);
  } catch (const recovery::StalePlanError& e) {
    add(tick_prefix(tick_) + "WARN " + e.what(), json{{"tick", tick_}, {"record", "warning"}, {"message", e.what()}}.dump());
    return;
  }
  acted_ = true;
  for (const recovery::ActionRecord& r : exec.log) {
    add(recovery::format_action(tick_, top, r),
        json{{"tick", tick_},
             {"record", "recover"},
             {"cause", diagnosis::to_string(top.kind)},
             {"target", top.target},
             {"action", recovery::to_string(r.action.kind)},
             {"channel", recovery::to_string(r.action.channel)},
             {"result", r.ok ? "ok" : "fail"}}
            .dump());
  }
  retry_ = !exec.recovered && !exec.unrecoverable;
  if (exec.recovered) {
    attempts_.erase(top);
    monitoring::SymptomSet now = monitoring::collect(net_, cfg.thresholds, tick_);
    for (const SymptomKey& k : recovery::residual_symptoms(net_, top)) {
      if (now.contains(k)) acked_.insert(k);
    }
  } else if (exec.unrecoverable) {
    escalate(top, "no_spare");
  }
}

void Engine::step() {
  if (finished_) return;
  const Config& cfg = scenario_.config;

  while (next_event_ < scenario_.events.size() && scenario_.events[next_event_].tick == tick_) {
    apply(scenario_.events[next_event_++]);
  }

  symptoms_ = monitoring::collect(net_, cfg.thresholds, tick_);
  std::set<SymptomKey> keys;
  for (const monitoring::Symptom& s : symptoms_) {
    keys.insert(s.key());
    if (previous_keys_.contains(s.key())) continue;
    json js{{"tick", tick_},
            {"record", "symptom"},
            {"plane", monitoring::to_string(s.plane)},
            {"source", s.source},
            {"kind", monitoring::to_string(s.kind)},
            {"severity", monitoring::to_string(s.severity)}};
    if (s.value) js["value"] = std::stod(monitoring::format_value(*s.value));
    add(monitoring::format_symptom(s), js.dump());
  }
  previous_keys_ = keys;
  std::erase_if(acked_, [&](const SymptomKey& k) { return !keys.contains(k); });

  observe(true);
  control_loop();
  observe(false);

  // End-of-tick view decides whether the change is benign enough to adopt.
  symptoms_ = monitoring::collect(net_, cfg.thresholds, tick_);
  std::erase_if(acked_, [&](const SymptomKey& k) { return !symptoms_.contains(k); });
  bool faults_open = open_symptoms(true);

  Snapshot current = snapshots_.take(net_);
  diagnosis::TopologyDiff diff = diagnosis::diff_snapshots(state_.healthy, current);
  auto outcome = diagnosis::refresh_on_change(state_, current, diff, faults_open);
  bool retained_now = outcome == diagnosis::RefreshOutcome::retained;
  if (outcome == diagnosis::RefreshOutcome::promoted || (retained_now && !retained_)) {
    add(tick_prefix(tick_) + "REFRESH " + std::string(diagnosis::to_string(outcome)) +
            " healthy=" + std::to_string(state_.healthy.version()) + " changes=" + std::to_string(diff.size()),
        json{{"tick", tick_},
             {"record", "refresh"},
             {"outcome", diagnosis::to_string(outcome)},
             {"healthy", state_.healthy.version()},
             {"changes", diff.size()}}
            .dump());
  }
  retained_ = retained_now;

  bool events_done = next_event_ == scenario_.events.size() && tick_ >= last_event_tick_;
  report_.ticks = tick_ + 1;
  if ((events_done && (!faults_open || !acted_)) || tick_ >= cfg.max_ticks) {
    finished_ = true;
    report_.status = escalated_any_ ? FinalStatus::human_assistance
                     : faults_open  ? FinalStatus::unresolved
                                    : FinalStatus::all_recovered;
    return;
  }
  ++tick_;
}

RunReport Engine::finish() {
  while (!finished_) step();
  return report_;
}

RunReport run(const Scenario& scenario) {
  Engine engine(scenario);
  return engine.finish();
}

std::optional<ReportFormat> parse_report_format(std::string_view text) {
  if (text == "text") return ReportFormat::text;
  if (text == "jsonl") return ReportFormat::jsonl;
  return std::nullopt;
}

std::string emit_report(const Scenario& scenario, const RunReport& report, ReportFormat format) {
  const Config& cfg = scenario.config;
  const char* mode = scenario.network.topology.mode() == net::ControlMode::in_band ? "in_band" : "out_of_band";
  std::vector<Record> lines;
  lines.push_back({"RUN " + scenario.name + " mode=" + mode + " proactive=" + (cfg.proactive ? "on" : "off") +
                       " seed=" + std::to_string(cfg.seed) + " max_ticks=" + std::to_string(cfg.max_ticks),
                   json{{"record", "run"},
                        {"scenario", scenario.name},
                        {"mode", mode},
                        {"proactive", cfg.proactive},
                        {"seed", cfg.seed},
                        {"max_ticks", cfg.max_ticks}}
                       .dump()});
  lines.insert(lines.end(), report.records.begin(), report.records.end());
  lines.push_back({"FINAL " + std::string(to_string(report.status)) + " ticks=" + std::to_string(report.ticks) +
                       " iterations=" + std::to_string(report.iterations),
                   json{{"record", "final"},
                        {"status", to_string(report.status)},
                        {"ticks", report.ticks},
                        {"iterations", report.iterations}}
                       .dump()});
  for (const auto& [id, tl] : report.timelines) {
    lines.push_back({"AVAILABILITY " + id + " " + fixed6(tl.availability()),
                     json{{"record", "availability"}, {"service", id}, {"fraction", std::stod(fixed6(tl.availability()))}}
                         .dump()});
  }
  std::string out;
  for (const Record& r : lines) {
    out += format == ReportFormat::text ? r.text : r.json;
    out += '\n';
  }
  return out;
}

}  // namespace healnet::sim
