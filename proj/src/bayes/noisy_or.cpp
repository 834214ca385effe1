#include <algorithm>
#include <cmath>
#include <numeric>

#include "healnet/bayes.hpp"
#include "healnet/kernels.hpp"

namespace healnet::bayes {

std::size_t NoisyOrNetwork::add_cause(std::string name, double prior) {
  if (!(prior > 0.0 && prior < 1.0)) throw InvariantError("cause prior must lie in (0, 1): " + name);
  if (cause_index_.contains(name)) throw InvariantError("duplicate cause " + name);
  cause_index_.emplace(name, causes_.size());
  causes_.push_back(CauseNode{std::move(name), prior});
  return causes_.size() - 1;
}

std::size_t NoisyOrNetwork::add_symptom(std::string name, double leak) {
  if (!(leak >= 0.0 && leak < 1.0)) throw InvariantError("symptom leak must lie in [0, 1): " + name);
  if (symptom_index_.contains(name)) throw InvariantError("duplicate symptom " + name);
  symptom_index_.emplace(name, symptoms_.size());
  symptoms_.push_back(SymptomNode{std::move(name), leak, {}});
  return symptoms_.size() - 1;
}

void NoisyOrNetwork::link(std::size_t cause, std::size_t symptom, double strength) {
  if (cause >= causes_.size() || symptom >= symptoms_.size()) throw InvariantError("link endpoint out of range");
  if (!(strength > 0.0 && strength <= 1.0)) throw InvariantError("link strength must lie in (0, 1]");
  auto& parents = symptoms_[symptom].parents;
  auto it = std::find_if(parents.begin(), parents.end(), [&](const ParentLink& p) { return p.cause == cause; });
  if (it != parents.end()) {
    it->strength = std::max(it->strength, strength);
    return;
  }
  parents.push_back(ParentLink{cause, strength});
}

std::optional<std::size_t> NoisyOrNetwork::find_cause(std::string_view name) const {
  auto it = cause_index_.find(std::string(name));
  if (it == cause_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> NoisyOrNetwork::find_symptom(std::string_view name) const {
  auto it = symptom_index_.find(std::string(name));
  if (it == symptom_index_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::vector<ParentLink>> NoisyOrNetwork::children() const {
  std::vector<std::vector<ParentLink>> out(causes_.size());
  for (std::size_t s = 0; s < symptoms_.size(); ++s) {
    for (const ParentLink& p : symptoms_[s].parents) out[p.cause].push_back(ParentLink{s, p.strength});
  }
  return out;
}

namespace {

struct DisjointSets {
  std::vector<std::size_t> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

kernels::Masses solve(const kernels::Component& c, const InferenceOptions& options) {
  Algorithm algo = options.algorithm;
  if (algo == Algorithm::automatic) {
    algo = c.causes <= c.findings ? Algorithm::enumerate_causes : Algorithm::sum_over_findings;
  }
  std::size_t exponent = algo == Algorithm::enumerate_causes ? c.causes : c.findings;
  if (exponent > options.max_exponent) {
    throw ModelTooLargeError("component with " + std::to_string(c.causes) + " causes and " +
                             std::to_string(c.findings) + " positive findings exceeds exact inference limit 2^" +
                             std::to_string(options.max_exponent));
  }
  bool vector = options.backend == Backend::avx2 ||
                (options.backend == Backend::automatic && kernels::avx2_available());
  if (algo == Algorithm::enumerate_causes) {
    return vector ? kernels::enumerate_causes_avx2(c) : kernels::enumerate_causes_scalar(c);
  }
  return vector ? kernels::sum_over_findings_avx2(c) : kernels::sum_over_findings_scalar(c);
}

}  // namespace

std::vector<double> posteriors(const NoisyOrNetwork& net, const Evidence& evidence,
                               const InferenceOptions& options) {
  const std::size_t n_causes = net.causes().size();
  const auto& symptoms = net.symptoms();

  enum class Obs { unobserved, present, absent };
  std::vector<Obs> obs(symptoms.size(), Obs::unobserved);
  for (const auto& [name, present] : evidence) {
    auto idx = net.find_symptom(name);
    if (!idx) throw UnknownIdError("evidence names unknown symptom " + name);
    obs[*idx] = present ? Obs::present : Obs::absent;
  }

  // Negative findings factorise: an active cause must have failed to trigger
  // every absent child. Unobserved symptoms marginalise out entirely.
  std::vector<double> on(n_causes);
  std::vector<double> off(n_causes);
  for (std::size_t c = 0; c < n_causes; ++c) {
    on[c] = net.causes()[c].prior;
    off[c] = 1.0 - net.causes()[c].prior;
  }
  std::vector<std::size_t> positives;
  for (std::size_t s = 0; s < symptoms.size(); ++s) {
    if (obs[s] == Obs::absent) {
      for (const ParentLink& p : symptoms[s].parents) on[p.cause] *= 1.0 - p.strength;
    } else if (obs[s] == Obs::present) {
      positives.push_back(s);
    }
  }

  // Causes sharing a positive finding are coupled; everything else is
  // independent a posteriori.
  DisjointSets sets(n_causes + positives.size());
  std::vector<bool> coupled(n_causes, false);
  for (std::size_t f = 0; f < positives.size(); ++f) {
    for (const ParentLink& p : symptoms[positives[f]].parents) {
      sets.unite(p.cause, n_causes + f);
      coupled[p.cause] = true;
    }
  }

  std::vector<double> result(n_causes);
  for (std::size_t c = 0; c < n_causes; ++c) {
    if (!coupled[c]) result[c] = on[c] / (on[c] + off[c]);
  }

  std::map<std::size_t, std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> components;
  for (std::size_t c = 0; c < n_causes; ++c) {
    if (coupled[c]) components[sets.find(c)].first.push_back(c);
  }
  for (std::size_t f = 0; f < positives.size(); ++f) {
    // A positive finding without parents only carries its leak: a constant.
    if (symptoms[positives[f]].parents.empty()) continue;
    components[sets.find(n_causes + f)].second.push_back(positives[f]);
  }

  for (const auto& [root, members] : components) {
    const auto& [causes, findings] = members;
    kernels::Component comp;
    comp.causes = causes.size();
    comp.findings = findings.size();
    comp.q.assign(comp.causes * comp.findings, 1.0);
    std::vector<std::size_t> local(n_causes, 0);
    for (std::size_t i = 0; i < causes.size(); ++i) {
      local[causes[i]] = i;
      comp.on.push_back(on[causes[i]]);
      comp.off.push_back(off[causes[i]]);
    }
    for (std::size_t j = 0; j < findings.size(); ++j) {
      const SymptomNode& s = symptoms[findings[j]];
      comp.keep.push_back(1.0 - s.leak);
      for (const ParentLink& p : s.parents) comp.q[local[p.cause] * comp.findings + j] = 1.0 - p.strength;
    }
    kernels::Masses masses = solve(comp, options);
    for (std::size_t i = 0; i < causes.size(); ++i) {
      double p = masses.active[i] / masses.total;
      result[causes[i]] = std::clamp(p, 0.0, 1.0);
    }
  }
  return result;
}

}  // namespace healnet::bayes
