#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "healnet/diagnosis.hpp"
#include "healnet/metrics.hpp"
#include "healnet/service_model.hpp"

/// Recovery catalog: maps each diagnosed root cause to its ordered recovery
/// actions, applies them to the model and checks whether the fault is gone.
namespace healnet::recovery {

enum class ActionKind {
  reconfigure_service,
  reconfigure_apps_of_service,
  reinitiate_apps,
  restart_service,
  restart_app,
  migrate_app_vm,
  instantiate_app_vm,
  augment_vm_resources,
  configure_app,
  set_standalone_mode,
  reroute_around_switch,
  failover_controller,
  reconfigure_bridge,
  reduce_uplink_power,
  reconfigure_client_app,
  install_client_flow,
};

/// How an action reaches the network.
enum class Channel { service_reconfig, app_orchestration, controller_programming, direct_data_plane };

std::string_view to_string(ActionKind kind);
std::string_view to_string(Channel channel);

struct RecoveryAction {
  ActionKind kind;
  std::string target;
  Channel channel;
  bool operator==(const RecoveryAction&) const = default;
};

struct RecoveryPlan {
  diagnosis::RootCause cause;
  std::vector<RecoveryAction> actions;
};

struct CatalogRow {
  monitoring::Plane plane;
  diagnosis::CauseKind cause;
  std::vector<ActionKind> actions;
};

/// One row per root cause kind, in table order.
const std::vector<CatalogRow>& catalog();
const CatalogRow& catalog_row(diagnosis::CauseKind cause);

/// The catalog actions for `cause`, targeted and with channels resolved
/// against the current state.
RecoveryPlan plan(const diagnosis::RootCause& cause, const service::Network& net);

struct Settings {
  MetricThresholds thresholds;
  double power_step = 1.0;  // uplink power decrement per reduction step
};

enum class Verdict { recovered, not_recovered };

/// Symptoms that legitimately outlive a successful recovery: the failed
/// element's own alarm, and lost control paths of switches now running
/// standalone.
std::set<monitoring::SymptomKey> residual_symptoms(const service::Network& net,
                                                   const diagnosis::RootCause& cause);

/// Recovered iff no symptom the model links to the cause is still raised,
/// residuals aside.
Verdict verify(const service::Network& net, const diagnosis::RootCause& cause,
               const diagnosis::Model& model, const MetricThresholds& th);

class StalePlanError : public Error {
 public:
  using Error::Error;
};

/// No spare resource (backup controller, VM host) exists for an action.
class UnrecoverableError : public Error {
 public:
  using Error::Error;
};

struct ActionRecord {
  RecoveryAction action;
  bool ok = false;
  std::string note;
};

struct ExecutionResult {
  std::vector<ActionRecord> log;
  bool recovered = false;
  /// Some action lacked a spare and nothing else in the plan worked.
  bool unrecoverable = false;
};

/// Applies the plan's actions in order, verifying after each one and stopping
/// at the first success. Throws StalePlanError when the target is gone.
ExecutionResult execute(const RecoveryPlan& plan, service::Network& net, const diagnosis::Model& model,
                        const Settings& settings);

/// `TICK <t> RECOVER <cause-kind> <target> ACTION <action-kind> <channel> <ok|fail>`
std::string format_action(int tick, const diagnosis::RootCause& cause, const ActionRecord& record);

}  // namespace healnet::recovery
