#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "healnet/ids.hpp"

/// Data-plane and control-plane state of an SDN network: nodes, links, flow
/// tables, control mode, and switch operating modes.
namespace healnet::net {

enum class NodeKind { switch_node, controller, host, server, client, access_point, vm_host };
enum class NodeStatus { up, crashed, misconfigured };
enum class SwitchMode { secure, standalone };
enum class LinkKind { data, control };
enum class LinkStatus { up, down };
enum class ControlMode { in_band, out_of_band };
enum class Installer { controller, self_healer };
enum class LinkMetric { delay, jitter, throughput };

std::string_view to_string(NodeKind kind);
std::string_view to_string(NodeStatus status);
std::string_view to_string(SwitchMode mode);
std::string_view to_string(LinkKind kind);
std::string_view to_string(LinkStatus status);
std::string_view to_string(ControlMode mode);
std::string_view to_string(Installer installer);
std::string_view to_string(LinkMetric metric);

std::optional<NodeKind> parse_node_kind(std::string_view text);
std::optional<LinkKind> parse_link_kind(std::string_view text);
std::optional<ControlMode> parse_control_mode(std::string_view text);
std::optional<LinkMetric> parse_link_metric(std::string_view text);

inline constexpr double kUnlimited = std::numeric_limits<double>::infinity();

struct Node {
  NodeId id;
  NodeKind kind = NodeKind::host;
  NodeStatus status = NodeStatus::up;
  std::optional<SwitchMode> switch_mode;  // switches only
  std::optional<double> uplink_power;     // access points only
  double cpu = 0.0;                       // vm_host / server resources
  double mem = 0.0;
  double request_capacity = kUnlimited;   // controllers: requests/s answered
  double request_rate = 0.0;              // switches: requests/s sent upward

  bool is_switch() const noexcept { return kind == NodeKind::switch_node; }
  bool is_up() const noexcept { return status == NodeStatus::up; }
  bool operator==(const Node&) const = default;
};

/// Builds a node with the per-kind defaults filled in (secure mode for
/// switches, power 0 for access points, 16 cpu / 32 mem for vm hosts).
Node make_node(NodeId id, NodeKind kind);

struct LinkMetrics {
  double delay_ms = 1.0;
  double jitter_ms = 0.0;
  double throughput = 1000.0;
  bool operator==(const LinkMetrics&) const = default;
};

struct Link {
  LinkId id;
  NodeId a;
  NodeId b;
  LinkKind kind = LinkKind::data;
  LinkStatus status = LinkStatus::up;
  LinkMetrics metrics;

  bool is_up() const noexcept { return status == LinkStatus::up; }
  bool touches(const NodeId& n) const noexcept { return a == n || b == n; }
  const NodeId& other(const NodeId& n) const noexcept { return a == n ? b : a; }
  bool operator==(const Link&) const = default;
};

struct FlowRule {
  NodeId switch_id;
  std::string match;
  NodeId out_port;
  Installer installed_by = Installer::controller;
  bool operator==(const FlowRule&) const = default;
};

using RuleKey = std::pair<NodeId, std::string>;

struct TopologyDecl {
  ControlMode mode = ControlMode::in_band;
  std::vector<Node> nodes;
  std::vector<Link> links;
  std::vector<NodeId> controllers;  // primary first
};

class Topology {
 public:
  ControlMode mode() const noexcept { return mode_; }
  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  const std::vector<Link>& links() const noexcept { return links_; }
  const std::map<RuleKey, FlowRule>& rules() const noexcept { return rules_; }
  const std::vector<NodeId>& controllers() const noexcept { return controllers_; }

  const Node* find_node(const NodeId& id) const;
  const Link* find_link(const LinkId& id) const;
  /// Throws UnknownIdError.
  const Node& node(const NodeId& id) const;
  const Link& link(const LinkId& id) const;
  const FlowRule* find_rule(const NodeId& sw, std::string_view match) const;

  /// Links touching `n`, in declaration order.
  std::vector<const Link*> incident(const NodeId& n) const;
  /// The dedicated control link of a switch (out_of_band only).
  const Link* control_link_of(const NodeId& sw) const;

  /// The controller currently in charge; backups take over on failover.
  const NodeId& active_controller() const { return controllers_.at(active_); }
  std::size_t active_controller_index() const noexcept { return active_; }

  void set_link_status(const LinkId& id, LinkStatus status);
  void set_node_status(const NodeId& id, NodeStatus status);
  void set_link_metric(const LinkId& id, LinkMetric metric, double value);
  void set_uplink_power(const NodeId& ap, double power);
  void set_request_rate(const NodeId& sw, double rate);
  void set_switch_mode(const NodeId& sw, SwitchMode mode);

  /// Idempotent for an identical rule; a rule with the same (switch, match)
  /// but another out_port replaces the old one.
  void install_flow(const FlowRule& rule);
  /// Returns false when no such rule existed.
  bool remove_flow(const NodeId& sw, std::string_view match);

  /// Makes the first up backup after the active controller the active one.
  /// Returns the new active controller, or nothing if no backup is up.
  std::optional<NodeId> fail_over();

  /// Attaches a new node with one data link (client join).
  void attach_node(Node node, Link link);
  /// Removes a node together with its links and the rules that reference it.
  void detach_node(const NodeId& id);

  /// Bumped by every mutation; not part of equality.
  std::uint64_t revision() const noexcept { return revision_; }

  bool operator==(const Topology& other) const;

 private:
  friend Topology build_topology(const TopologyDecl& decl);

  Node& mutable_node(const NodeId& id);
  Link& mutable_link(const LinkId& id);
  void reindex();

  ControlMode mode_ = ControlMode::in_band;
  std::vector<Node> nodes_;
  std::vector<Link> links_;
  std::map<RuleKey, FlowRule> rules_;
  std::vector<NodeId> controllers_;
  std::size_t active_ = 0;
  std::unordered_map<std::string, std::size_t> node_index_;
  std::unordered_map<std::string, std::size_t> link_index_;
  std::uint64_t revision_ = 0;
};

/// Validates a declaration and builds the topology. Throws InvariantError on
/// duplicate ids, dangling endpoints, control links under in_band, or a
/// switch lacking its control link under out_of_band.
Topology build_topology(const TopologyDecl& decl);

using Path = std::vector<LinkId>;
using TransitFn = std::function<bool(const Node&)>;
using LinkFilterFn = std::function<bool(const Link&)>;

/// Hop-count shortest path over links accepted by `usable`. Intermediate
/// nodes must satisfy `transit`; the endpoints are exempt. Among equal-length
/// paths the one whose next node id is lexicographically smallest at each
/// step wins (parallel links: smallest link id). Both endpoints must be up.
std::optional<Path> shortest_path(const Topology& t, const NodeId& from, const NodeId& to,
                                  const LinkFilterFn& usable, const TransitFn& transit);

/// Route control traffic takes from switch `sw` to the active controller.
/// out_of_band: the switch's dedicated control link if it and the controller
/// are up. in_band: shortest path over up data links through non-crashed
/// switches. Throws InvariantError if `sw` is not a switch.
std::optional<Path> control_path(const Topology& t, const NodeId& sw);

/// Control paths of every switch, computed once per topology state.
class ControlView {
 public:
  explicit ControlView(const Topology& t);

  const std::optional<Path>& path(const NodeId& sw) const;
  bool connected(const NodeId& sw) const { return path(sw).has_value(); }

 private:
  std::map<NodeId, std::optional<Path>> paths_;
};

/// Whether `sw` can forward packets of flow `match` right now: it must be up
/// and either run standalone, reach the controller, or hold a rule for the flow.
bool can_forward(const Topology& t, const ControlView& control, const NodeId& sw,
                 std::string_view match);

/// Nodes visited by a path starting at `from`, including both endpoints.
std::vector<NodeId> path_nodes(const Topology& t, const NodeId& from, const Path& path);

}  // namespace healnet::net
