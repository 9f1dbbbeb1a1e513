// Benchmark CLI: run method x epsilon matrices on the instance families,
// render result tables, and run the acceptance suite.

#include "saddlecut/bench.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "acceptance_suite.hpp"

using namespace saddlecut;

namespace {

int cmd_run(const std::string& config_path, const std::string& out_path,
            std::optional<std::uint64_t> seed, bool strict) {
  nlohmann::json j;
  {
    std::ifstream in(config_path);
    if (!in) {
      std::cerr << "config error: cannot open " << config_path << "\n";
      return 2;
    }
    try {
      in >> j;
    } catch (const std::exception& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return 2;
    }
  }
  BenchConfig cfg;
  try {
    cfg = parse_config(j);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  if (seed) cfg.seed = *seed;
  if (!out_path.empty()) cfg.output = out_path;
  if (strict) cfg.strict = true;

  const auto reports = run_matrix(cfg);
  const std::string csv = render_table(reports, TableFormat::csv);
  if (cfg.output.empty()) {
    std::cout << csv;
  } else {
    std::ofstream out(cfg.output);
    out << csv;
    std::cout << "wrote " << reports.size() << " reports to " << cfg.output
              << "\n";
  }
  if (cfg.strict)
    for (const auto& r : reports)
      if (r.timed_out) return 3;
  return 0;
}

int cmd_table(const std::string& in_path, const std::string& format) {
  std::ifstream in(in_path);
  if (!in) {
    std::cerr << "config error: cannot open " << in_path << "\n";
    return 2;
  }
  if (format != "csv" && format != "md") {
    std::cerr << "config error: unknown format " << format << "\n";
    return 2;
  }
  try {
    const auto reports = parse_csv(in);
    std::cout << render_table(
        reports, format == "csv" ? TableFormat::csv : TableFormat::markdown);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

int cmd_verify(const std::string& suite) {
  if (suite != "acceptance") {
    std::cerr << "config error: unknown suite " << suite << "\n";
    return 2;
  }
  return run_acceptance_suite(std::cout) == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"saddlecut benchmark harness"};
  app.require_subcommand(1);

  std::string config_path, out_path, in_path, format = "md",
                                              suite = "acceptance";
  std::optional<std::uint64_t> seed;
  bool strict = false;

  auto* run = app.add_subcommand("run", "run a benchmark matrix");
  run->add_option("--config", config_path, "JSON config path")->required();
  run->add_option("--out", out_path, "CSV output path");
  run->add_option("--seed", seed, "seed override");
  run->add_flag("--strict", strict, "exit 3 when any cell times out");

  auto* table = app.add_subcommand("table", "render a results table");
  table->add_option("--in", in_path, "CSV input path")->required();
  table->add_option("--format", format, "md or csv");

  auto* verify = app.add_subcommand("verify", "run a verification suite");
  verify->add_option("--suite", suite, "suite name (acceptance)");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) return cmd_run(config_path, out_path, seed, strict);
  if (table->parsed()) return cmd_table(in_path, format);
  return cmd_verify(suite);
}
