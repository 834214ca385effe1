#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "healnet/diagnosis.hpp"
#include "healnet/monitoring.hpp"
#include "healnet/recovery.hpp"
#include "healnet/snapshot.hpp"

/// Scenario files, the tick-driven self-healing loop, and run reports.
namespace healnet::sim {

enum class EventKind {
  fail_link,
  restore_link,
  crash_node,
  restore_node,
  crash_app,
  crash_vnf,
  crash_service,
  misconfigure,
  set_metric,
  set_load,
  set_uplink_power,
  remove_flow,
  migrate_vnf,
  client_join,
  client_leave,
};

std::string_view to_string(EventKind kind);
std::optional<EventKind> parse_event_kind(std::string_view text);

struct Event {
  int tick = 0;
  EventKind kind = EventKind::fail_link;
  std::vector<std::string> args;
  int line = 0;
};

struct Config {
  std::uint64_t seed = 0;
  int max_ticks = 100;
  bool proactive = false;
  int max_iters = 3;  // recovery attempts per root cause before asking for help
  MetricThresholds thresholds;
  diagnosis::ModelParams bn;
  double power_step = 1.0;
};

struct Scenario {
  std::string name;
  Config config;
  service::Network network;  // as declared, before provisioning
  std::vector<Event> events;  // sorted by tick, file order within a tick
  std::vector<std::string> warnings;
};

/// Parses and validates a scenario. Throws ParseError carrying the line.
Scenario parse_scenario(std::string_view text, std::string name = "scenario");
Scenario load_scenario(const std::filesystem::path& path);

enum class FinalStatus { all_recovered, human_assistance, unresolved };
std::string_view to_string(FinalStatus status);
int exit_code(FinalStatus status);

/// One report line, kept in both renderings so text and json-lines output
/// always carry the same records.
struct Record {
  std::string text;
  std::string json;
};

struct ServiceTimeline {
  std::vector<std::pair<int, service::ServiceStatus>> changes;
  int observed = 0;
  int up = 0;  // observations not in the failed state

  double availability() const { return observed == 0 ? 1.0 : static_cast<double>(up) / observed; }
};

struct RunReport {
  std::vector<Record> records;
  FinalStatus status = FinalStatus::all_recovered;
  int ticks = 0;
  int iterations = 0;
  std::map<std::string, ServiceTimeline> timelines;
};

class Engine {
 public:
  explicit Engine(const Scenario& scenario);

  /// Runs one tick: due events, observation, one control-loop pass, refresh.
  void step();
  bool finished() const noexcept { return finished_; }
  int tick() const noexcept { return tick_; }
  RunReport finish();

  const service::Network& network() const noexcept { return net_; }
  const diagnosis::DiagnosisState& diagnosis_state() const noexcept { return state_; }
  const monitoring::SymptomSet& symptoms() const noexcept { return symptoms_; }
  const std::set<monitoring::SymptomKey>& acknowledged() const noexcept { return acked_; }
  const RunReport& report() const noexcept { return report_; }

 private:
  void apply(const Event& e);
  void observe(bool sample);
  void control_loop();
  void escalate(const diagnosis::RootCause& cause, std::string_view reason);
  void add(const std::string& text, const std::string& json);
  bool open_symptoms(bool any_severity) const;

  Scenario scenario_;
  service::Network net_;
  Snapshotter snapshots_;
  diagnosis::DiagnosisState state_;
  std::size_t next_event_ = 0;
  int tick_ = 0;
  int last_event_tick_ = 0;
  bool finished_ = false;
  bool escalated_any_ = false;

  monitoring::SymptomSet symptoms_;
  std::set<monitoring::SymptomKey> previous_keys_;
  std::set<monitoring::SymptomKey> acked_;
  std::map<diagnosis::RootCause, int> attempts_;
  std::set<diagnosis::RootCause> escalated_;
  std::optional<bayes::Evidence> last_evidence_;
  bool acted_ = false;
  bool retained_ = false;
  bool retry_ = false;  // last attempt failed, try again on unchanged evidence

  std::map<std::string, service::ServiceStatus> service_status_;
  std::map<std::pair<std::string, std::string>, bool> client_reachable_;
  RunReport report_;
};

RunReport run(const Scenario& scenario);

enum class ReportFormat { text, jsonl };
std::optional<ReportFormat> parse_report_format(std::string_view text);

/// Header, every record, then the final status and per-service availability.
std::string emit_report(const Scenario& scenario, const RunReport& report, ReportFormat format);

}  // namespace healnet::sim
