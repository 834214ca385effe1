#include <algorithm>

#include <gtest/gtest.h>

#include "healnet/diagnosis.hpp"
#include "healnet/sim.hpp"
#include "support.hpp"

using namespace healnet;
using namespace healnet::diagnosis;
using monitoring::SymptomKey;
using monitoring::SymptomKind;

namespace {

service::Network network(const std::string& mode, const std::string& extra = "") {
  service::Network net = testing_support::standard(mode, extra).network;
  service::provision(net);
  return net;
}

bool has_kind(const Model& m, CauseKind k) {
  return std::any_of(m.causes().begin(), m.causes().end(), [&](const RootCause& c) { return c.kind == k; });
}

std::set<SymptomKey> effect_keys(const Model& m, const RootCause& c) {
  std::set<SymptomKey> out;
  for (const Effect& e : m.effects(c)) out.insert(e.symptom);
  return out;
}

}  // namespace

TEST(BuildModel, ModeGating) {
  Snapshotter snaps;
  Model oob = build_model(snaps.take(network("out_of_band")));
  EXPECT_FALSE(has_kind(oob, CauseKind::control_link_failure_in_band));
  EXPECT_TRUE(has_kind(oob, CauseKind::control_link_failure_out_of_band));
  Model inb = build_model(snaps.take(network("in_band")));
  EXPECT_TRUE(has_kind(inb, CauseKind::control_link_failure_in_band));
  EXPECT_FALSE(has_kind(inb, CauseKind::control_link_failure_out_of_band));
}

TEST(BuildModel, DefaultParameters) {
  Snapshotter snaps;
  Model m = build_model(snaps.take(network("in_band")));
  for (const auto& c : m.network().causes()) EXPECT_DOUBLE_EQ(c.prior, 0.01);
  for (const auto& s : m.network().symptoms()) {
    EXPECT_DOUBLE_EQ(s.leak, 0.001);
    for (const auto& p : s.parents) EXPECT_TRUE(p.strength == 0.95 || p.strength == 0.80);
  }
}

// Independent walk: a switch failing in band reaches every service whose
// topology contains it, or contains a secure switch whose control path runs
// through it.
TEST(BuildModel, SwitchFailureDependencyClosure) {
  Snapshotter snaps;
  auto net = network("in_band");
  Snapshot snap = snaps.take(net);
  Model m = build_model(snap);
  const auto& t = snap.topology();
  for (const auto& sw : t.nodes()) {
    if (!sw.is_switch()) continue;
    std::set<std::string> expected;
    for (const auto& [id, st] : snap.service_topologies()) {
      if (!st) continue;
      bool depends = st->nodes.contains(sw.id);
      for (const NodeId& n : st->nodes) {
        if (n == sw.id || !t.node(n).is_switch()) continue;
        auto cp = net::control_path(t, n);
        if (!cp) continue;
        auto visited = net::path_nodes(t, n, *cp);
        if (std::find(visited.begin(), visited.end(), sw.id) != visited.end()) depends = true;
      }
      if (depends) expected.insert(id);
    }
    std::set<std::string> got;
    bool own = false;
    for (const Effect& e : m.effects(RootCause{CauseKind::control_link_failure_in_band, sw.id.str()})) {
      if (e.symptom.kind == SymptomKind::service_down) got.insert(e.symptom.source);
      if (e.symptom == SymptomKey{SymptomKind::switch_down, sw.id.str()}) own = e.direct;
    }
    EXPECT_TRUE(own) << sw.id;
    EXPECT_EQ(got, expected) << sw.id;
  }
}

TEST(BuildModel, IsolatedAppOnlyLinksToItself) {
  Snapshotter snaps;
  Model m = build_model(snaps.take(network("in_band", "APP idle vmB cap=10\n")));
  EXPECT_EQ(effect_keys(m, {CauseKind::app_crash, "idle"}),
            (std::set<SymptomKey>{{SymptomKind::app_crashed, "idle"}}));
  EXPECT_EQ(effect_keys(m, {CauseKind::app_misconfiguration, "idle"}),
            (std::set<SymptomKey>{{SymptomKind::app_misconfig, "idle"}}));
  EXPECT_EQ(effect_keys(m, {CauseKind::app_too_many_requests, "idle"}),
            (std::set<SymptomKey>{{SymptomKind::app_overloaded, "idle"}}));
}

TEST(Correlate, ClosedWorldAndMasking) {
  Snapshotter snaps;
  Model m = build_model(snaps.take(network("in_band")));
  auto ev = correlate({}, m);
  EXPECT_EQ(ev.size(), m.symptoms().size());
  for (const auto& [k, v] : ev) EXPECT_FALSE(v) << k;

  monitoring::SymptomSet s({monitoring::make_symptom(SymptomKind::switch_down, "s2", 0)});
  SymptomKey masked{SymptomKind::control_path_lost, "s3"};
  auto ev2 = correlate(s, m, {masked});
  EXPECT_TRUE(ev2.at("switch_down/s2"));
  EXPECT_FALSE(ev2.contains(masked.str()));

  monitoring::SymptomSet unknown({monitoring::make_symptom(SymptomKind::client_unreachable, "newcomer", 0)});
  EXPECT_THROW(correlate(unknown, m), StaleModelError);
}

TEST(Infer, NoEvidenceGivesPriorsInStableOrder) {
  Snapshotter snaps;
  Model m = build_model(snaps.take(network("out_of_band")));
  auto r = infer(m, {});
  ASSERT_EQ(r.ranked.size(), m.causes().size());
  for (std::size_t i = 0; i < r.ranked.size(); ++i) {
    EXPECT_DOUBLE_EQ(r.ranked[i].posterior, 0.01);
    if (i > 0) {
      EXPECT_LT(r.ranked[i - 1].cause, r.ranked[i].cause);
    }
  }
}

// Rule removal: the service is down and a client's flow is missing while the
// applications and the rest of the data plane are quiet.
TEST(Infer, RuleRemovalRanksFirst) {
  for (const char* mode : {"in_band", "out_of_band"}) {
    Snapshotter snaps;
    auto net = network(mode);
    Model m = build_model(snaps.take(net));
    net.topology.remove_flow(NodeId("s3"), service::delivery_match("tv", NodeId("c2")));
    auto symptoms = monitoring::collect(net, {});
    ASSERT_TRUE(symptoms.contains({SymptomKind::service_down, "tv"}));
    ASSERT_TRUE(symptoms.contains({SymptomKind::rule_missing, "c2"}));
    auto r = infer(m, correlate(symptoms, m));
    EXPECT_EQ(r.top().cause, (RootCause{CauseKind::switch_missing_client_flow, "c2"})) << mode;
  }
}

TEST(Infer, FormatDiagnosis) {
  DiagnosisResult r;
  r.ranked = {{{CauseKind::app_crash, "a"}, 0.5}, {{CauseKind::service_crash, "s"}, 0.25},
              {{CauseKind::bridge_misconfigured, "x"}, 0.125}};
  auto lines = format_diagnosis(4, r, 1);
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_EQ(lines[0], "TICK 4 DIAGNOSIS app_crash a p=0.500000");
  EXPECT_EQ(lines[1], "TICK 4 DIAGNOSIS service_crash s p=0.250000");
}

TEST(Diff, IdenticalIsEmpty) {
  Snapshotter snaps;
  auto net = network("in_band");
  EXPECT_TRUE(diff_snapshots(snaps.take(net), snaps.take(net)).empty());
}

TEST(Diff, MigrationIsOnePlacementChange) {
  Snapshotter snaps;
  auto net = network("in_band", "NODE h9 vm_host\nLINK l9 s3 h9 data\n");
  Snapshot before = snaps.take(net);
  service::migrate_workload(net, "fw", NodeId("h9"));
  Snapshot after = snaps.take(net);
  auto d = diff_snapshots(before, after);
  EXPECT_EQ(d.placement_changes(), 1u);
  EXPECT_EQ(d.removed[DiffCategory::placements], std::set<std::string>{"fw@h1"});
  EXPECT_EQ(d.added[DiffCategory::placements], std::set<std::string>{"fw@h9"});
  EXPECT_FALSE(d.added[DiffCategory::chain].empty());
  EXPECT_EQ(apply_diff(facts_of(before), d), facts_of(after));
}

TEST(Diff, ClientJoinAddsNodeAndLink) {
  Snapshotter snaps;
  auto net = network("out_of_band");
  Snapshot before = snaps.take(net);
  net.topology.attach_node(net::make_node(NodeId("c9"), net::NodeKind::client),
                           net::Link{LinkId("l9"), NodeId("c9"), NodeId("s1"), net::LinkKind::data,
                                     net::LinkStatus::up, {}});
  auto d = diff_snapshots(before, snaps.take(net));
  EXPECT_EQ(d.added[DiffCategory::nodes].size(), 1u);
  EXPECT_EQ(d.added[DiffCategory::links].size(), 1u);
  EXPECT_EQ(d.size(), 2u);
}

TEST(Refresh, Outcomes) {
  Snapshotter snaps;
  auto net = network("in_band", "NODE h9 vm_host\nLINK l9 s3 h9 data\n");
  DiagnosisState state = make_state(snaps.take(net));
  std::uint64_t v0 = state.healthy.version();

  Snapshot same = snaps.take(net);
  EXPECT_EQ(refresh_on_change(state, same, diff_snapshots(state.healthy, same), false), RefreshOutcome::unchanged);
  EXPECT_EQ(state.healthy.version(), v0);

  service::migrate_workload(net, "fw", NodeId("h9"));
  Snapshot moved = snaps.take(net);
  EXPECT_EQ(refresh_on_change(state, moved, diff_snapshots(state.healthy, moved), false), RefreshOutcome::promoted);
  EXPECT_EQ(state.healthy.version(), moved.version());
  EXPECT_EQ(state.model.snapshot_version(), moved.version());

  net.topology.set_link_status(LinkId("l12"), net::LinkStatus::down);
  Snapshot broken = snaps.take(net);
  EXPECT_EQ(refresh_on_change(state, broken, diff_snapshots(state.healthy, broken), true), RefreshOutcome::retained);
  EXPECT_EQ(state.healthy.version(), moved.version());
}
