#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "healnet/bayes.hpp"
#include "healnet/monitoring.hpp"
#include "healnet/snapshot.hpp"

/// Root-cause diagnosis: a noisy-OR model from candidate root causes to the
/// symptoms they can produce, built from the latest healthy snapshot.
namespace healnet::diagnosis {

enum class CauseKind {
  service_misconfiguration,
  service_crash,
  app_crash,
  app_too_many_requests,
  app_misconfiguration,
  control_link_failure_in_band,
  control_link_failure_out_of_band,
  controller_failure,
  bridge_misconfigured,
  high_interference,
  client_app_misconfiguration,
  switch_missing_client_flow,
};

inline constexpr CauseKind kAllCauseKinds[] = {
    CauseKind::service_misconfiguration,         CauseKind::service_crash,
    CauseKind::app_crash,                        CauseKind::app_too_many_requests,
    CauseKind::app_misconfiguration,             CauseKind::control_link_failure_in_band,
    CauseKind::control_link_failure_out_of_band, CauseKind::controller_failure,
    CauseKind::bridge_misconfigured,             CauseKind::high_interference,
    CauseKind::client_app_misconfiguration,      CauseKind::switch_missing_client_flow,
};

std::string_view to_string(CauseKind kind);
std::optional<CauseKind> parse_cause_kind(std::string_view text);

struct RootCause {
  CauseKind kind;
  std::string target;

  auto operator<=>(const RootCause& o) const {
    if (auto c = to_string(kind) <=> to_string(o.kind); c != 0) return c;
    return target <=> o.target;
  }
  bool operator==(const RootCause&) const = default;
  std::string str() const;
};

struct ModelParams {
  double prior = 0.01;
  double link_direct = 0.95;
  double link_propagated = 0.80;
  double leak = 0.001;
};

struct Effect {
  monitoring::SymptomKey symptom;
  bool direct = false;
};

class StaleModelError : public Error {
 public:
  using Error::Error;
};

class Model {
 public:
  const bayes::NoisyOrNetwork& network() const noexcept { return network_; }
  const std::vector<RootCause>& causes() const noexcept { return causes_; }
  const std::vector<monitoring::SymptomKey>& symptoms() const noexcept { return symptoms_; }
  std::uint64_t snapshot_version() const noexcept { return version_; }

  std::optional<std::size_t> find_cause(const RootCause& c) const;
  bool has_symptom(const monitoring::SymptomKey& key) const;
  /// Symptoms the cause links to, in symptom order.
  std::vector<Effect> effects(const RootCause& c) const;
  /// Causes with an edge into the symptom.
  std::vector<RootCause> explanations(const monitoring::SymptomKey& key) const;

 private:
  friend Model build_model(const Snapshot& snapshot, const ModelParams& params);

  bayes::NoisyOrNetwork network_;
  std::vector<RootCause> causes_;
  std::vector<monitoring::SymptomKey> symptoms_;
  std::map<RootCause, std::vector<Effect>> effects_;
  std::uint64_t version_ = 0;
};

/// One cause node per root cause the snapshot can host, one symptom node per
/// (symptom code, entity), and an edge wherever a cause produces the symptom
/// on its own target (direct) or on a service, client, app or switch whose
/// healthy paths depend on the target (propagated).
Model build_model(const Snapshot& snapshot, const ModelParams& params = {});

/// Closed-world evidence: emitted symptoms present, every other symptom node
/// absent, keys in `masked` left unobserved. Throws StaleModelError when a
/// symptom has no node in the model.
bayes::Evidence correlate(const monitoring::SymptomSet& symptoms, const Model& model,
                          const std::set<monitoring::SymptomKey>& masked = {});

struct RankedCause {
  RootCause cause;
  double posterior = 0.0;
};

struct DiagnosisResult {
  std::vector<RankedCause> ranked;  // non-increasing posterior, ties by (kind, target)

  bool empty() const noexcept { return ranked.empty(); }
  const RankedCause& top() const { return ranked.front(); }
};

DiagnosisResult infer(const Model& model, const bayes::Evidence& evidence,
                      const bayes::InferenceOptions& options = {});

/// `TICK <t> DIAGNOSIS <kind> <target> p=<posterior>` for the top cause and
/// up to `runners_up` more.
std::vector<std::string> format_diagnosis(int tick, const DiagnosisResult& result,
                                          std::size_t runners_up = 4);

// ----------------------------------------------------------- topology diffs

enum class DiffCategory { nodes, links, rules, placements, chain };
inline constexpr DiffCategory kAllDiffCategories[] = {DiffCategory::nodes, DiffCategory::links,
                                                      DiffCategory::rules, DiffCategory::placements,
                                                      DiffCategory::chain};
std::string_view to_string(DiffCategory category);

/// A snapshot flattened to comparable facts per category: node and link
/// state lines, rules, "workload@host" placements, "service/link" chain hops.
using Facts = std::map<DiffCategory, std::set<std::string>>;
Facts facts_of(const Snapshot& s);

struct TopologyDiff {
  Facts added;
  Facts removed;

  bool empty() const;
  std::size_t size() const;
  /// Number of workloads whose placement differs.
  std::size_t placement_changes() const;
};

TopologyDiff diff_snapshots(const Snapshot& healthy, const Snapshot& current);
Facts apply_diff(Facts base, const TopologyDiff& diff);

// -------------------------------------------------- healthy-state tracking

struct DiagnosisState {
  Snapshot healthy;
  Model model;
  ModelParams params;
};

enum class RefreshOutcome { unchanged, promoted, retained };
std::string_view to_string(RefreshOutcome outcome);

DiagnosisState make_state(const Snapshot& healthy, const ModelParams& params = {});

/// Empty diff: nothing happens. Otherwise, if no fault is open the current
/// snapshot becomes the latest healthy one and the model is rebuilt from it;
/// with open faults the old healthy snapshot is kept.
RefreshOutcome refresh_on_change(DiagnosisState& state, const Snapshot& current,
                                 const TopologyDiff& diff, bool faults_open);

}  // namespace healnet::diagnosis
