#include <gtest/gtest.h>

#include "healnet/error.hpp"
#include "healnet/monitoring.hpp"
#include "healnet/net_model.hpp"
#include "healnet/snapshot.hpp"

using namespace healnet;
using namespace healnet::net;

namespace {

Link data(const char* id, const char* a, const char* b) { return Link{LinkId(id), NodeId(a), NodeId(b), LinkKind::data, LinkStatus::up, {}}; }
Link ctrl(const char* id, const char* a, const char* b) {
  return Link{LinkId(id), NodeId(a), NodeId(b), LinkKind::control, LinkStatus::up, {}};
}

TopologyDecl two_switches(ControlMode mode) {
  TopologyDecl d;
  d.mode = mode;
  d.nodes = {make_node(NodeId("ctl"), NodeKind::controller), make_node(NodeId("s1"), NodeKind::switch_node),
             make_node(NodeId("s2"), NodeKind::switch_node), make_node(NodeId("h"), NodeKind::host)};
  d.links = {data("d1", "s1", "s2"), data("d2", "s2", "h")};
  d.controllers = {NodeId("ctl")};
  return d;
}

TopologyDecl line3_in_band() {
  TopologyDecl d;
  d.nodes = {make_node(NodeId("ctl"), NodeKind::controller), make_node(NodeId("s1"), NodeKind::switch_node),
             make_node(NodeId("s2"), NodeKind::switch_node), make_node(NodeId("s3"), NodeKind::switch_node)};
  d.links = {data("lc", "ctl", "s1"), data("l12", "s1", "s2"), data("l23", "s2", "s3")};
  d.controllers = {NodeId("ctl")};
  return d;
}

}  // namespace

TEST(Topology, OutOfBandCountsControlLinks) {
  auto d = two_switches(ControlMode::out_of_band);
  d.links.push_back(ctrl("c1", "ctl", "s1"));
  d.links.push_back(ctrl("c2", "ctl", "s2"));
  Topology t = build_topology(d);
  EXPECT_EQ(t.links().size(), 4u);
  EXPECT_TRUE(t.rules().empty());
  for (const Node& n : t.nodes()) EXPECT_EQ(n.status, NodeStatus::up);
}

TEST(Topology, RejectsControlLinkInBand) {
  auto d = two_switches(ControlMode::in_band);
  d.links.push_back(ctrl("c1", "ctl", "s1"));
  EXPECT_THROW(build_topology(d), InvariantError);
}

TEST(Topology, RejectsSwitchWithoutControlLinkOutOfBand) {
  auto d = two_switches(ControlMode::out_of_band);
  d.links.push_back(ctrl("c1", "ctl", "s1"));
  EXPECT_THROW(build_topology(d), InvariantError);
}

TEST(Topology, RejectsDuplicatesAndDanglingLinks) {
  auto d = line3_in_band();
  d.nodes.push_back(make_node(NodeId("s1"), NodeKind::switch_node));
  EXPECT_THROW(build_topology(d), InvariantError);
  d = line3_in_band();
  d.links.push_back(data("lx", "s3", "ghost"));
  EXPECT_THROW(build_topology(d), InvariantError);
}

TEST(Topology, StatusChangesAreInvolutions) {
  Topology t = build_topology(line3_in_band());
  Topology before = t;
  t.set_link_status(LinkId("l12"), LinkStatus::down);
  t.set_link_status(LinkId("l12"), LinkStatus::up);
  t.set_node_status(NodeId("s2"), NodeStatus::crashed);
  t.set_node_status(NodeId("s2"), NodeStatus::up);
  EXPECT_EQ(t, before);
  EXPECT_THROW(t.set_link_status(LinkId("nope"), LinkStatus::down), UnknownIdError);
}

TEST(Topology, CrashedControllerStaysListed) {
  Topology t = build_topology(line3_in_band());
  t.set_node_status(NodeId("ctl"), NodeStatus::crashed);
  ASSERT_EQ(t.controllers().size(), 1u);
  EXPECT_EQ(t.node(NodeId("ctl")).status, NodeStatus::crashed);
}

TEST(Topology, FlowRules) {
  Topology t = build_topology(line3_in_band());
  auto before = t.rules();
  FlowRule r{NodeId("s2"), "x", NodeId("s3")};
  t.install_flow(r);
  t.install_flow(r);
  EXPECT_EQ(t.rules().size(), before.size() + 1);
  EXPECT_TRUE(t.remove_flow(NodeId("s2"), "x"));
  EXPECT_EQ(t.rules(), before);
  EXPECT_THROW(t.install_flow(FlowRule{NodeId("s1"), "y", NodeId("s3")}), InvariantError);
}

TEST(ControlPath, OutOfBandUsesDedicatedLink) {
  auto d = two_switches(ControlMode::out_of_band);
  d.links.push_back(ctrl("c1", "ctl", "s1"));
  d.links.push_back(ctrl("c2", "ctl", "s2"));
  Topology t = build_topology(d);
  EXPECT_EQ(control_path(t, NodeId("s1")), Path{LinkId("c1")});
  t.set_link_status(LinkId("c1"), LinkStatus::down);
  EXPECT_FALSE(control_path(t, NodeId("s1")));
  t.set_link_status(LinkId("d1"), LinkStatus::down);
  EXPECT_TRUE(control_path(t, NodeId("s2")));
  EXPECT_THROW(control_path(t, NodeId("h")), InvariantError);
}

TEST(ControlPath, InBandLine) {
  Topology t = build_topology(line3_in_band());
  Path expected{LinkId("l23"), LinkId("l12"), LinkId("lc")};
  EXPECT_EQ(control_path(t, NodeId("s3")), expected);
  t.set_link_status(LinkId("l12"), LinkStatus::down);
  EXPECT_FALSE(control_path(t, NodeId("s3")));
  EXPECT_TRUE(control_path(t, NodeId("s1")));
}

TEST(ControlPath, InBandRingReconverges) {
  TopologyDecl d = line3_in_band();
  d.links.push_back(data("l31", "s3", "s1"));
  Topology t = build_topology(d);
  EXPECT_EQ(control_path(t, NodeId("s3")), (Path{LinkId("l31"), LinkId("lc")}));
  // s2 has two equal-length routes; the smaller next hop (s1) wins.
  EXPECT_EQ(control_path(t, NodeId("s2")), (Path{LinkId("l12"), LinkId("lc")}));
  t.set_link_status(LinkId("l31"), LinkStatus::down);
  EXPECT_EQ(control_path(t, NodeId("s3")), (Path{LinkId("l23"), LinkId("l12"), LinkId("lc")}));
}

TEST(Forwarding, SecureNeedsControlOrRule) {
  Topology t = build_topology(line3_in_band());
  t.set_link_status(LinkId("l12"), LinkStatus::down);
  ControlView view(t);
  EXPECT_TRUE(can_forward(t, view, NodeId("s1"), "new"));
  EXPECT_FALSE(can_forward(t, view, NodeId("s3"), "new"));
  t.install_flow(FlowRule{NodeId("s3"), "old", NodeId("s2")});
  EXPECT_TRUE(can_forward(t, ControlView(t), NodeId("s3"), "old"));
  t.set_switch_mode(NodeId("s3"), SwitchMode::standalone);
  EXPECT_TRUE(can_forward(t, ControlView(t), NodeId("s3"), "new"));
  t.set_node_status(NodeId("s3"), NodeStatus::crashed);
  EXPECT_FALSE(can_forward(t, ControlView(t), NodeId("s3"), "new"));
}

TEST(ShortestPath, TiesBreakOnSmallestNextNode) {
  TopologyDecl d;
  d.mode = ControlMode::in_band;
  for (const char* n : {"a", "m", "b", "z"}) d.nodes.push_back(make_node(NodeId(n), NodeKind::switch_node));
  d.nodes.push_back(make_node(NodeId("ctl"), NodeKind::controller));
  d.links = {data("az", "a", "z"), data("zb", "z", "b"), data("am", "a", "m"), data("mb", "m", "b"),
             data("c", "ctl", "a")};
  d.controllers = {NodeId("ctl")};
  Topology t = build_topology(d);
  auto up = [](const Link& l) { return l.is_up(); };
  auto any = [](const Node&) { return true; };
  EXPECT_EQ(shortest_path(t, NodeId("a"), NodeId("b"), up, any), (Path{LinkId("am"), LinkId("mb")}));
}

TEST(Snapshot, SnapshotsAreImmutableAndVersioned) {
  Topology t = build_topology(line3_in_band());
  Snapshotter snaps;
  service::Inventory inv;
  Snapshot a = snaps.take(t, inv);
  Snapshot b = snaps.take(t, inv);
  EXPECT_LT(a.version(), b.version());
  EXPECT_TRUE(a.same_content(b));
  t.set_link_status(LinkId("l12"), LinkStatus::down);
  EXPECT_TRUE(a.topology().link(LinkId("l12")).is_up());
  std::uint64_t last = b.version();
  for (int i = 0; i < 100; ++i) {
    auto s = snaps.take(t, inv);
    EXPECT_GT(s.version(), last);
    last = s.version();
  }
}
