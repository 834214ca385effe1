#include <algorithm>
#include <chrono>
#include <filesystem>

#include <json.hpp>
#include <gtest/gtest.h>

#include "healnet/sim.hpp"
#include "support.hpp"

using namespace healnet;
using namespace healnet::sim;
using testing_support::fields;
using testing_support::text_lines;

namespace {

const char* kMinimal = R"(
MODE in_band
NODE ctl controller
NODE s1 switch
NODE h vm_host
NODE c client
NODE srv server
LINK l0 ctl s1 data
LINK l1 s1 h data
LINK l2 s1 c data
LINK l3 s1 srv data
CONTROLLERS ctl
VNF fw h
SERVICE web FG fw FROM c TO srv USERS c
)";

int parse_error_line(const std::string& text) {
  try {
    parse_scenario(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return -1;
}

std::vector<std::filesystem::path> corpus() {
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(testing_support::source_dir() / "scenarios")) {
    if (e.path().extension() == ".hn") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> with_tag(const RunReport& r, const std::string& tag) {
  std::vector<std::string> out;
  for (const auto& line : text_lines(r)) {
    auto f = fields(line);
    if (f.size() > 2 && f[2] == tag) out.push_back(line);
  }
  return out;
}

}  // namespace

// ------------------------------------------------------------------ parser

TEST(Parser, MinimalScenario) {
  Scenario s = parse_scenario(kMinimal);
  EXPECT_TRUE(s.events.empty());
  EXPECT_TRUE(s.warnings.empty());
  EXPECT_EQ(s.network.inventory.services().size(), 1u);
  EXPECT_EQ(s.config.max_ticks, 100);
}

TEST(Parser, UndeclaredNodeNamesLine) {
  std::string text = std::string(kMinimal) + "AT 3 crash_node s9\n";
  int expected = static_cast<int>(std::count(text.begin(), text.end(), '\n'));
  EXPECT_EQ(parse_error_line(text), expected);
}

TEST(Parser, SyntaxErrorsCarryLine) {
  EXPECT_EQ(parse_error_line("MODE in_band\nNODE a toaster\n"), 2);
  EXPECT_EQ(parse_error_line("FROB x\n"), 1);
  EXPECT_EQ(parse_error_line("CONFIG max_ticks many\n"), 1);
  EXPECT_EQ(parse_error_line("NODE a switch\nNODE a switch\n"), 2);
  EXPECT_EQ(parse_error_line(std::string(kMinimal) + "LINK lc ctl s1 control\n"),
            static_cast<int>(std::count(kMinimal, kMinimal + std::strlen(kMinimal), '\n')) + 1);
}

TEST(Parser, OutOfOrderEventsReorderStably) {
  Scenario s = parse_scenario(std::string(kMinimal) +
                              "AT 5 fail_link l1\nAT 2 crash_vnf fw\nAT 5 restore_link l1\nAT 2 crash_node h\n");
  ASSERT_EQ(s.warnings.size(), 1u);
  std::vector<std::pair<int, EventKind>> order;
  for (const auto& e : s.events) order.emplace_back(e.tick, e.kind);
  EXPECT_EQ(order, (std::vector<std::pair<int, EventKind>>{{2, EventKind::crash_vnf},
                                                           {2, EventKind::crash_node},
                                                           {5, EventKind::fail_link},
                                                           {5, EventKind::restore_link}}));
}

TEST(Parser, ClientJoinCreatesTarget) {
  std::string base = std::string(kMinimal) + "AT 2 client_join c9 s1 web\n";
  EXPECT_NO_THROW(parse_scenario(base + "AT 4 client_leave c9\n"));
  EXPECT_GT(parse_error_line(std::string(kMinimal) + "AT 4 client_leave c9\n"), 0);
  EXPECT_GT(parse_error_line(base + "AT 4 client_leave c9\nAT 5 client_leave c9\n"), 0);
}

TEST(Parser, CorpusParses) {
  auto files = corpus();
  EXPECT_GE(files.size(), 10u);
  for (const auto& f : files) EXPECT_NO_THROW(load_scenario(f)) << f;
}

// ------------------------------------------------------------------ engine

TEST(Engine, QuietRun) {
  Scenario s = parse_scenario(kMinimal, "quiet");
  RunReport r = run(s);
  EXPECT_TRUE(r.records.empty());
  EXPECT_EQ(r.status, FinalStatus::all_recovered);
  EXPECT_DOUBLE_EQ(r.timelines.at("web").availability(), 1.0);
  EXPECT_EQ(emit_report(s, r, ReportFormat::text),
            "RUN quiet mode=in_band proactive=off seed=0 max_ticks=100\n"
            "FINAL all_recovered ticks=1 iterations=0\n"
            "AVAILABILITY web 1.000000\n");
}

TEST(Engine, FailLinkOnServicePathHandledInSameTick) {
  Scenario s = testing_support::standard("in_band", "AT 2 fail_link l23\n");
  RunReport r = run(s);
  auto lines = text_lines(r);
  auto at = [&](const std::string& tag) {
    return std::find_if(lines.begin(), lines.end(), [&](const std::string& l) {
      auto f = fields(l);
      return f[1] == "2" && f[2] == tag;
    });
  };
  auto sym = at("SYMPTOM"), diag = at("DIAGNOSIS"), rec = at("RECOVER");
  ASSERT_NE(sym, lines.end());
  ASSERT_NE(diag, lines.end());
  ASSERT_NE(rec, lines.end());
  EXPECT_LT(sym, diag);
  EXPECT_LT(diag, rec);
  EXPECT_EQ(r.status, FinalStatus::all_recovered);
}

TEST(Engine, DegradedWithoutProactiveIsOnlyLogged) {
  Scenario s = testing_support::standard("out_of_band", "AT 2 set_uplink_power ap1 20\n");
  RunReport r = run(s);
  EXPECT_FALSE(with_tag(r, "SYMPTOM").empty());
  EXPECT_TRUE(with_tag(r, "DIAGNOSIS").empty());
  EXPECT_TRUE(with_tag(r, "RECOVER").empty());
  EXPECT_EQ(r.status, FinalStatus::unresolved);
}

TEST(Engine, ControllerCrashWithoutBackupNeedsHuman) {
  Scenario s = testing_support::standard("out_of_band", "AT 2 crash_node ctl1\nAT 2 crash_node ctl2\n");
  RunReport r = run(s);
  EXPECT_EQ(r.status, FinalStatus::human_assistance);
  EXPECT_EQ(with_tag(r, "ESCALATE").size(), 1u);
  EXPECT_EQ(exit_code(r.status), 2);
}

TEST(Engine, RetryLimitEscalates) {
  // s3 is cut off and its VNF host link is gone too: standalone mode and
  // rerouting both run, neither brings the chain back.
  Scenario s = testing_support::standard("in_band",
                                         "CONFIG max_iters 2\n"
                                         "AT 2 fail_link l23\nAT 2 fail_link lh\n");
  RunReport r = run(s);
  EXPECT_EQ(r.status, FinalStatus::human_assistance);
  auto esc = with_tag(r, "ESCALATE");
  ASSERT_EQ(esc.size(), 1u);
  EXPECT_LE(r.iterations, 2);
}

TEST(Engine, ActionsFollowTheirJustification) {
  for (const auto& f : corpus()) {
    RunReport r = run(load_scenario(f));
    bool seen_symptom = false, seen_diag = false;
    for (const auto& line : text_lines(r)) {
      auto t = fields(line);
      if (t.size() < 3) continue;
      if (t[2] == "SYMPTOM") seen_symptom = true;
      if (t[2] == "DIAGNOSIS") seen_diag = true;
      if (t[2] == "RECOVER") {
        EXPECT_TRUE(seen_symptom && seen_diag) << f << ": " << line;
      }
    }
  }
}

TEST(Engine, AvailabilityChangesOnlyWithStatus) {
  RunReport r = run(load_scenario(testing_support::source_dir() / "scenarios" / "multicast_video.hn"));
  const auto& tl = r.timelines.at("video");
  ASSERT_FALSE(tl.changes.empty());
  for (std::size_t i = 1; i < tl.changes.size(); ++i) EXPECT_NE(tl.changes[i].second, tl.changes[i - 1].second);
  EXPECT_EQ(tl.changes.back().second, service::ServiceStatus::available);
}

// --------------------------------------------------------- identifiability

struct Injection {
  const char* mode;
  const char* extra;
  diagnosis::RootCause truth;
};

class SingleFault : public ::testing::TestWithParam<Injection> {};

TEST_P(SingleFault, RanksFirstAndRecovers) {
  const Injection& inj = GetParam();
  Scenario s = testing_support::standard(inj.mode, inj.extra);
  Engine engine(s);
  while (!engine.finished()) engine.step();
  const RunReport& r = engine.report();
  auto diag = with_tag(r, "DIAGNOSIS");
  ASSERT_FALSE(diag.empty());
  auto top = fields(diag.front());
  EXPECT_EQ(top[3] + "/" + top[4], inj.truth.str());

  int recovered_at = -1;
  for (const auto& line : with_tag(r, "RECOVER")) {
    auto f = fields(line);
    if (f[3] + "/" + f[4] == inj.truth.str() && f.back() == "ok") recovered_at = std::stoi(f[1]);
  }
  ASSERT_GE(recovered_at, 0);
  EXPECT_LE(recovered_at - 2, 2);  // injected at tick 2, recovered within 3 ticks
  EXPECT_EQ(r.status, FinalStatus::all_recovered);
}

using diagnosis::CauseKind;

INSTANTIATE_TEST_SUITE_P(
    AllCauses, SingleFault,
    ::testing::Values(
        Injection{"in_band", "AT 2 misconfigure tv\n", {CauseKind::service_misconfiguration, "tv"}},
        Injection{"out_of_band", "AT 2 misconfigure tv\n", {CauseKind::service_misconfiguration, "tv"}},
        Injection{"in_band", "AT 2 crash_service tv\n", {CauseKind::service_crash, "tv"}},
        Injection{"out_of_band", "AT 2 crash_service tv\n", {CauseKind::service_crash, "tv"}},
        Injection{"in_band", "AT 2 crash_app orch\n", {CauseKind::app_crash, "orch"}},
        Injection{"out_of_band", "AT 2 crash_vnf fw\n", {CauseKind::app_crash, "fw"}},
        Injection{"in_band", "CONFIG proactive on\nAT 2 set_load orch 150\n",
                  {CauseKind::app_too_many_requests, "orch"}},
        Injection{"out_of_band", "CONFIG proactive on\nAT 2 set_load fw 170\n",
                  {CauseKind::app_too_many_requests, "fw"}},
        Injection{"in_band", "AT 2 misconfigure fw\n", {CauseKind::app_misconfiguration, "fw"}},
        Injection{"out_of_band", "AT 2 misconfigure orch\n", {CauseKind::app_misconfiguration, "orch"}},
        Injection{"in_band", "AT 2 fail_link l23\n", {CauseKind::control_link_failure_in_band, "l23"}},
        Injection{"out_of_band", "AT 2 fail_link k3\n", {CauseKind::control_link_failure_out_of_band, "k3"}},
        Injection{"in_band", "AT 2 crash_node ctl1\n", {CauseKind::controller_failure, "ctl1"}},
        Injection{"out_of_band", "AT 2 crash_node ctl1\n", {CauseKind::controller_failure, "ctl1"}},
        Injection{"in_band", "AT 2 misconfigure s3\n", {CauseKind::bridge_misconfigured, "s3"}},
        Injection{"out_of_band", "AT 2 misconfigure s3\n", {CauseKind::bridge_misconfigured, "s3"}},
        Injection{"in_band", "CONFIG proactive on\nAT 2 set_uplink_power ap1 20\n",
                  {CauseKind::high_interference, "ap1"}},
        Injection{"out_of_band", "CONFIG proactive on\nAT 2 set_uplink_power ap1 20\n",
                  {CauseKind::high_interference, "ap1"}},
        Injection{"in_band", "AT 2 misconfigure c2\n", {CauseKind::client_app_misconfiguration, "c2"}},
        Injection{"out_of_band", "AT 2 misconfigure c3\n", {CauseKind::client_app_misconfiguration, "c3"}},
        Injection{"in_band", "AT 2 remove_flow s3 tv@c2\n", {CauseKind::switch_missing_client_flow, "c2"}},
        Injection{"out_of_band", "AT 2 remove_flow s3 tv@c3\n", {CauseKind::switch_missing_client_flow, "c3"}}),
    [](const ::testing::TestParamInfo<Injection>& info) {
      return std::string(diagnosis::to_string(info.param.truth.kind)) + "_" + info.param.mode;
    });

// ----------------------------------------------------------------- reports

TEST(Report, DeterministicAndFormatsAgree) {
  auto start = std::chrono::steady_clock::now();
  for (const auto& f : corpus()) {
    Scenario s = load_scenario(f);
    std::string a = emit_report(s, run(s), ReportFormat::text);
    std::string b = emit_report(s, run(s), ReportFormat::text);
    EXPECT_EQ(a, b) << f;
    std::string j = emit_report(s, run(s), ReportFormat::jsonl);
    EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), std::count(j.begin(), j.end(), '\n')) << f;
    std::istringstream in(j);
    for (std::string line; std::getline(in, line);) {
      EXPECT_TRUE(nlohmann::json::accept(line)) << line;
    }
  }
  EXPECT_LT(std::chrono::steady_clock::now() - start, std::chrono::seconds(30));
}

TEST(Report, UnknownFormat) {
  EXPECT_FALSE(parse_report_format("xml"));
  EXPECT_EQ(parse_report_format("jsonl"), ReportFormat::jsonl);
}

TEST(Report, GoldenLogs) {
  for (const char* name : {"multicast_video", "link_cut_in_band", "fig4_migration"}) {
    Scenario s = load_scenario(testing_support::source_dir() / "scenarios" / (std::string(name) + ".hn"));
    std::string expected = testing_support::read_file(testing_support::source_dir() / "tests" / "data" /
                                                      "golden" / (std::string(name) + ".txt"));
    EXPECT_EQ(emit_report(s, run(s), ReportFormat::text), expected) << name;
  }
}
