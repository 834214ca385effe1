#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "healnet/error.hpp"

/// Bipartite noisy-OR Bayesian networks (causes -> symptoms) and exact
/// posterior inference over their root causes.
namespace healnet::bayes {

struct CauseNode {
  std::string name;
  double prior = 0.01;
};

struct ParentLink {
  std::size_t cause;
  double strength;  // P(symptom | only this cause active, no leak)
};

struct SymptomNode {
  std::string name;
  double leak = 0.001;
  std::vector<ParentLink> parents;
};

class NoisyOrNetwork {
 public:
  /// Priors must lie in (0, 1).
  std::size_t add_cause(std::string name, double prior);
  /// Leaks must lie in [0, 1).
  std::size_t add_symptom(std::string name, double leak);
  /// Strength must lie in (0, 1]. Linking the same pair twice keeps the
  /// stronger link.
  void link(std::size_t cause, std::size_t symptom, double strength);

  const std::vector<CauseNode>& causes() const noexcept { return causes_; }
  const std::vector<SymptomNode>& symptoms() const noexcept { return symptoms_; }
  std::optional<std::size_t> find_cause(std::string_view name) const;
  std::optional<std::size_t> find_symptom(std::string_view name) const;

  /// Symptoms each cause points to, with strengths.
  std::vector<std::vector<ParentLink>> children() const;

 private:
  std::vector<CauseNode> causes_;
  std::vector<SymptomNode> symptoms_;
  std::unordered_map<std::string, std::size_t> cause_index_;
  std::unordered_map<std::string, std::size_t> symptom_index_;
};

/// Observed symptom states keyed by symptom name; absent keys are unobserved.
using Evidence = std::map<std::string, bool>;

class ModelTooLargeError : public Error {
 public:
  using Error::Error;
};

enum class Backend { automatic, scalar, avx2 };
enum class Algorithm { automatic, enumerate_causes, sum_over_findings };

struct InferenceOptions {
  /// Largest exponent (2^n terms) an exact component may need.
  std::size_t max_exponent = 24;
  Backend backend = Backend::automatic;
  Algorithm algorithm = Algorithm::automatic;
};

/// Exact P(cause = 1 | evidence) for every cause, in cause index order.
/// Throws UnknownIdError for evidence naming no symptom and
/// ModelTooLargeError when a coupled component exceeds `max_exponent`.
std::vector<double> posteriors(const NoisyOrNetwork& net, const Evidence& evidence,
                               const InferenceOptions& options = {});

}  // namespace healnet::bayes
