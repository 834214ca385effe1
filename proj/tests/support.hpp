#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "healnet/bayes.hpp"
#include "healnet/sim.hpp"

namespace testing_support {

inline std::filesystem::path source_dir() { return HEALNET_SOURCE_DIR; }

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

/// A standard test topology with extra lines appended (events, CONFIG).
inline healnet::sim::Scenario standard(const std::string& mode, const std::string& extra) {
  std::string text = read_file(source_dir() / "tests" / "data" / ("standard_" + mode + ".hn"));
  return healnet::sim::parse_scenario(text + "\n" + extra, "standard_" + mode);
}

inline std::vector<std::string> text_lines(const healnet::sim::RunReport& r) {
  std::vector<std::string> out;
  for (const auto& rec : r.records) out.push_back(rec.text);
  return out;
}

inline std::vector<std::string> fields(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

/// Random bipartite noisy-OR network with `causes + symptoms` nodes and a
/// random evidence assignment over a random subset of the symptoms.
struct RandomCase {
  healnet::bayes::NoisyOrNetwork net;
  healnet::bayes::Evidence evidence;
};

inline RandomCase random_case(std::mt19937_64& rng, int max_nodes = 20) {
  std::uniform_int_distribution<int> total_d(2, max_nodes);
  int total = total_d(rng);
  std::uniform_int_distribution<int> causes_d(1, total - 1);
  int causes = causes_d(rng);
  int symptoms = total - causes;
  std::uniform_real_distribution<double> prior(0.001, 0.6);
  std::uniform_real_distribution<double> strength(0.05, 1.0);
  std::uniform_real_distribution<double> leak(0.0, 0.2);
  std::uniform_real_distribution<double> u(0.0, 1.0);

  RandomCase rc;
  for (int c = 0; c < causes; ++c) rc.net.add_cause("c" + std::to_string(c), prior(rng));
  for (int s = 0; s < symptoms; ++s) {
    rc.net.add_symptom("s" + std::to_string(s), u(rng) < 0.2 ? 0.0 : leak(rng));
    for (int c = 0; c < causes; ++c) {
      if (u(rng) < 0.35) rc.net.link(c, s, strength(rng));
    }
    double r = u(rng);
    if (r < 0.45) rc.evidence["s" + std::to_string(s)] = true;
    else if (r < 0.8) rc.evidence["s" + std::to_string(s)] = false;
  }
  return rc;
}

/// Posteriors by summing the full joint over every cause assignment; the
/// symptoms are either observed or marginalised out (which sums to one).
inline std::vector<double> brute_force(const healnet::bayes::NoisyOrNetwork& net,
                                       const healnet::bayes::Evidence& ev) {
  const auto& causes = net.causes();
  const auto& symptoms = net.symptoms();
  std::size_t k = causes.size();
  double total = 0.0;
  std::vector<double> active(k, 0.0);
  for (std::uint64_t a = 0; a < (std::uint64_t{1} << k); ++a) {
    double w = 1.0;
    for (std::size_t c = 0; c < k; ++c) w *= (a >> c & 1) ? causes[c].prior : 1.0 - causes[c].prior;
    for (const auto& s : symptoms) {
      auto it = ev.find(s.name);
      if (it == ev.end()) continue;
      double silent = 1.0 - s.leak;
      for (const auto& p : s.parents) {
        if (a >> p.cause & 1) silent *= 1.0 - p.strength;
      }
      w *= it->second ? 1.0 - silent : silent;
    }
    total += w;
    for (std::size_t c = 0; c < k; ++c) {
      if (a >> c & 1) active[c] += w;
    }
  }
  for (double& v : active) v /= total;
  return active;
}

}  // namespace testing_support
