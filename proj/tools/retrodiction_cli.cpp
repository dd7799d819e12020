// Command-line front end for scenario files.
//
//   retrodiction run <scenario.json> [--out PATH] [--format json|csv]
//   retrodiction examples [--dir DIR] [--json]

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#if __has_include(<CLI/CLI.hpp>)
#include <CLI/CLI.hpp>
#else
#include "CLI11.hpp"
#endif

#include "retrodiction/scenario.hpp"

namespace fs = std::filesystem;
using retrodiction::cli::json;

namespace {

fs::path default_scenario_dir() {
  if (const char* env = std::getenv("RETRODICTION_SCENARIOS")) return env;
  return RETRODICTION_SCENARIO_DIR;
}

int report(const std::exception& e) {
  std::cerr << retrodiction::cli::error_report(e).dump(2) << std::endl;
  return retrodiction::cli::exit_code_for(e);
}

int run_command(const std::string& path, const std::string& out_path,
                retrodiction::cli::OutputFormat format) {
  const auto doc = retrodiction::cli::run_file(path);
  const std::string text = doc.render(format);
  if (out_path.empty()) {
    std::cout << text;
    return 0;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) {
    std::cerr << "cannot open output file '" << out_path << "'" << std::endl;
    return 1;
  }
  out << text;
  return 0;
}

int examples_command(const fs::path& dir, bool as_json) {
  const auto entries = retrodiction::cli::list_examples(dir);
  if (as_json) {
    json list = json::array();
    for (const auto& e : entries) {
      list.push_back(json{{"name", e.name}, {"kind", e.kind}, {"description", e.description},
                          {"path", e.path.string()}});
    }
    std::cout << list.dump(2) << std::endl;
    return 0;
  }
  for (const auto& e : entries) {
    std::cout << e.name << '\t' << e.kind << '\t' << e.path.string() << '\n'
              << "    " << e.description << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum retrodiction scenarios: Bayes tables, retrodictive states, beam-splitter optics, BB84"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run a scenario file and print the result document");
  std::string scenario_path;
  std::string out_path;
  std::string format_name = "json";
  run->add_option("scenario", scenario_path, "Scenario JSON file")->required();
  run->add_option("--out", out_path, "Write the result here instead of stdout");
  run->add_option("--format", format_name, "Output format")
      ->check(CLI::IsMember({"json", "csv"}));

  auto* examples = app.add_subcommand("examples", "List the bundled scenario files");
  std::string dir = default_scenario_dir().string();
  bool as_json = false;
  examples->add_option("--dir", dir, "Scenario directory");
  examples->add_flag("--json", as_json, "Print the catalog as JSON");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const auto format = format_name == "csv" ? retrodiction::cli::OutputFormat::csv
                                               : retrodiction::cli::OutputFormat::json;
      return run_command(scenario_path, out_path, format);
    }
    return examples_command(dir, as_json);
  } catch (const std::exception& e) {
    return report(e);
  }
}
