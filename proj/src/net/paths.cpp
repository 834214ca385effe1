#include <deque>
#include <unordered_map>

#include "healnet/error.hpp"
#include "healnet/net_model.hpp"

namespace healnet::net {

std::optional<Path> shortest_path(const Topology& t, const NodeId& from, const NodeId& to,
                                  const LinkFilterFn& usable, const TransitFn& transit) {
  const Node& src = t.node(from);
  const Node& dst = t.node(to);
  if (!src.is_up() && src.status == NodeStatus::crashed) return std::nullopt;
  if (!dst.is_up() && dst.status == NodeStatus::crashed) return std::nullopt;
  if (from == to) return Path{};

  // BFS outward from the destination, expanding only through transit nodes,
  // then walk back from the source choosing the smallest next id per hop.
  std::unordered_map<std::string, int> dist;
  dist[to.str()] = 0;
  std::deque<NodeId> queue{to};
  while (!queue.empty()) {
    NodeId cur = queue.front();
    queue.pop_front();
    if (cur != to && !transit(t.node(cur))) continue;
    if (cur == from) continue;
    int d = dist[cur.str()];
    for (const Link* l : t.incident(cur)) {
      if (!usable(*l)) continue;
      const NodeId& next = l->other(cur);
      if (dist.emplace(next.str(), d + 1).second) queue.push_back(next);
    }
  }
  auto found = dist.find(from.str());
  if (found == dist.end()) return std::nullopt;

  Path path;
  NodeId cur = from;
  int remaining = found->second;
  while (cur != to) {
    const Link* best = nullptr;
    for (const Link* l : t.incident(cur)) {
      if (!usable(*l)) continue;
      const NodeId& next = l->other(cur);
      auto it = dist.find(next.str());
      if (it == dist.end() || it->second != remaining - 1) continue;
      if (next != to && !transit(t.node(next))) continue;
      if (!best || next < best->other(cur) || (next == best->other(cur) && l->id < best->id)) {
        best = l;
      }
    }
    if (!best) return std::nullopt;
    path.push_back(best->id);
    cur = best->other(cur);
    --remaining;
  }
  return path;
}

std::optional<Path> control_path(const Topology& t, const NodeId& sw) {
  const Node& n = t.node(sw);
  if (!n.is_switch()) throw InvariantError(sw.str() + " is not a switch");
  if (n.status == NodeStatus::crashed) return std::nullopt;
  const Node& ctrl = t.node(t.active_controller());
  if (ctrl.status == NodeStatus::crashed) return std::nullopt;

  if (t.mode() == ControlMode::out_of_band) {
    const Link* l = t.control_link_of(sw);
    if (!l || !l->is_up()) return std::nullopt;
    return Path{l->id};
  }
  auto data_up = [](const Link& l) { return l.kind == LinkKind::data && l.is_up(); };
  auto switch_alive = [](const Node& v) {
    return v.is_switch() && v.status != NodeStatus::crashed;
  };
  return shortest_path(t, sw, ctrl.id, data_up, switch_alive);
}

ControlView::ControlView(const Topology& t) {
  for (const Node& n : t.nodes()) {
    if (n.is_switch()) paths_.emplace(n.id, control_path(t, n.id));
  }
}

const std::optional<Path>& ControlView::path(const NodeId& sw) const {
  auto it = paths_.find(sw);
  if (it == paths_.end()) throw InvariantError(sw.str() + " is not a switch");
  return it->second;
}

bool can_forward(const Topology& t, const ControlView& control, const NodeId& sw,
                 std::string_view match) {
  const Node& n = t.node(sw);
  if (!n.is_switch() || !n.is_up()) return false;
  if (n.switch_mode == SwitchMode::standalone) return true;
  if (control.connected(sw)) return true;
  return t.find_rule(sw, match) != nullptr;
}

std::vector<NodeId> path_nodes(const Topology& t, const NodeId& from, const Path& path) {
  std::vector<NodeId> out{from};
  NodeId cur = from;
  for (const LinkId& id : path) {
    cur = t.link(id).other(cur);
    out.push_back(cur);
  }
  return out;
}

}  // namespace healnet::net
