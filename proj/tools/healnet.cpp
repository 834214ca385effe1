#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "healnet/recovery.hpp"
#include "healnet/sim.hpp"

namespace {

constexpr int kUsage = 64;
constexpr int kDataErr = 65;

void print_catalog() {
  using namespace healnet;
  for (const recovery::CatalogRow& row : recovery::catalog()) {
    std::string line = std::string(monitoring::to_string(row.plane)) + " " + std::string(diagnosis::to_string(row.cause));
    for (std::size_t i = 0; i < row.actions.size(); ++i) {
      line += " " + std::to_string(i + 1) + ")" + std::string(recovery::to_string(row.actions[i]));
    }
    std::cout << line << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  using namespace healnet;

  CLI::App app{"healnet: self-healing SDN/NFV simulator"};
  app.require_subcommand(1);

  std::string run_file, report = "text", out_path;
  int max_iters = 0;
  auto* run_cmd = app.add_subcommand("run", "run a scenario and print its report");
  run_cmd->add_option("file", run_file, "scenario file")->required();
  run_cmd->add_option("--report", report, "text or jsonl");
  run_cmd->add_option("--out", out_path, "write the report here instead of stdout");
  run_cmd->add_option("--max-iters", max_iters, "recovery attempts per cause before escalating")
      ->check(CLI::PositiveNumber);

  std::string check_file;
  auto* check_cmd = app.add_subcommand("check", "parse and validate a scenario");
  check_cmd->add_option("file", check_file, "scenario file")->required();

  auto* catalog_cmd = app.add_subcommand("catalog", "print the root cause to recovery mapping");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kUsage;
  }

  if (catalog_cmd->parsed()) {
    print_catalog();
    return 0;
  }

  auto format = sim::parse_report_format(report);
  if (!format) {
    std::cerr << "unknown report format: " << report << '\n';
    return kUsage;
  }

  const std::string& file = run_cmd->parsed() ? run_file : check_file;
  sim::Scenario scenario;
  try {
    scenario = sim::load_scenario(file);
  } catch (const ParseError& e) {
    std::cerr << file << ": " << e.what() << '\n';
    return kDataErr;
  }

  if (check_cmd->parsed()) {
    for (const std::string& w : scenario.warnings) std::cerr << "warning: " << w << '\n';
    std::cout << "OK " << scenario.name << " events=" << scenario.events.size() << '\n';
    return 0;
  }

  if (max_iters > 0) scenario.config.max_iters = max_iters;
  sim::RunReport result = sim::run(scenario);
  std::string text = sim::emit_report(scenario, result, *format);
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
      std::cerr << "cannot write " << out_path << '\n';
      return kUsage;
    }
    out << text;
  }
  return sim::exit_code(result.status);
}
