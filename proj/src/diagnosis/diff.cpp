#include "healnet/diagnosis.hpp"

namespace healnet::diagnosis {

using monitoring::format_value;

std::string_view to_string(DiffCategory category) {
  switch (category) {
    case DiffCategory::nodes: return "nodes";
    case DiffCategory::links: return "links";
    case DiffCategory::rules: return "rules";
    case DiffCategory::placements: return "placements";
    case DiffCategory::chain: return "chain";
  }
  return "?";
}

std::string_view to_string(RefreshOutcome outcome) {
  switch (outcome) {
    case RefreshOutcome::unchanged: return "unchanged";
    case RefreshOutcome::promoted: return "promoted";
    case RefreshOutcome::retained: return "retained";
  }
  return "?";
}

Facts facts_of(const Snapshot& s) {
  const net::Topology& t = s.topology();
  Facts f;
  for (DiffCategory c : kAllDiffCategories) f[c];

  for (const net::Node& n : t.nodes()) {
    std::string line = n.id.str() + " " + std::string(net::to_string(n.kind)) + " " +
                       std::string(net::to_string(n.status));
    if (n.switch_mode) line += " mode=" + std::string(net::to_string(*n.switch_mode));
    if (n.uplink_power) line += " power=" + format_value(*n.uplink_power);
    if (n.cpu > 0 || n.mem > 0) line += " cpu=" + format_value(n.cpu) + " mem=" + format_value(n.mem);
    if (n.kind == net::NodeKind::controller) {
      line += " cap=" + format_value(n.request_capacity);
      if (n.id == t.active_controller()) line += " active";
    }
    if (n.is_switch()) line += " req=" + format_value(n.request_rate);
    f[DiffCategory::nodes].insert(line);
  }
  for (const net::Link& l : t.links()) {
    f[DiffCategory::links].insert(l.id.str() + " " + l.a.str() + " " + l.b.str() + " " +
                                  std::string(net::to_string(l.kind)) + " " +
                                  std::string(net::to_string(l.status)) + " delay=" +
                                  format_value(l.metrics.delay_ms) + " jitter=" +
                                  format_value(l.metrics.jitter_ms) + " throughput=" +
                                  format_value(l.metrics.throughput));
  }
  for (const auto& [key, r] : t.rules()) {
    f[DiffCategory::rules].insert(r.switch_id.str() + " " + r.match + " " + r.out_port.str() + " " +
                                  std::string(net::to_string(r.installed_by)));
  }
  for (const service::Workload& w : s.inventory().workloads()) {
    f[DiffCategory::placements].insert(w.id + "@" + w.host.str());
  }
  for (const auto& [id, st] : s.service_topologies()) {
    if (!st) continue;
    for (const LinkId& l : st->chain_path) f[DiffCategory::chain].insert(id + "/" + l.str());
  }
  return f;
}

bool TopologyDiff::empty() const { return size() == 0; }

std::size_t TopologyDiff::size() const {
  std::size_t n = 0;
  for (const auto& [c, items] : added) n += items.size();
  for (const auto& [c, items] : removed) n += items.size();
  return n;
}

std::size_t TopologyDiff::placement_changes() const {
  std::set<std::string> workloads;
  for (const Facts* side : {&added, &removed}) {
    auto it = side->find(DiffCategory::placements);
    if (it == side->end()) continue;
    for (const std::string& p : it->second) workloads.insert(p.substr(0, p.rfind('@')));
  }
  return workloads.size();
}

TopologyDiff diff_snapshots(const Snapshot& healthy, const Snapshot& current) {
  Facts before = facts_of(healthy);
  Facts after = facts_of(current);
  TopologyDiff d;
  for (DiffCategory c : kAllDiffCategories) {
    auto& add = d.added[c];
    auto& rem = d.removed[c];
    for (const std::string& x : after[c]) {
      if (!before[c].contains(x)) add.insert(x);
    }
    for (const std::string& x : before[c]) {
      if (!after[c].contains(x)) rem.insert(x);
    }
  }
  return d;
}

Facts apply_diff(Facts base, const TopologyDiff& diff) {
  for (const auto& [c, items] : diff.removed) {
    for (const std::string& x : items) base[c].erase(x);
  }
  for (const auto& [c, items] : diff.added) base[c].insert(items.begin(), items.end());
  return base;
}

DiagnosisState make_state(const Snapshot& healthy, const ModelParams& params) {
  return DiagnosisState{healthy, build_model(healthy, params), params};
}

RefreshOutcome refresh_on_change(DiagnosisState& state, const Snapshot& current, const TopologyDiff& diff,
                                 bool faults_open) {
  if (diff.empty()) return RefreshOutcome::unchanged;
  if (faults_open) return RefreshOutcome::retained;
  state.healthy = current;
  state.model = build_model(current, state.params);
  return RefreshOutcome::promoted;
}

}  // namespace healnet::diagnosis
