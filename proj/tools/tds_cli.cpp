// Command-line harness: `run` executes a configured trial battery, writing
// trials.csv and summary.json; `calibrate` searches a constants grid for a
// completeness target; `report` aggregates trial CSVs.
//
// Exit codes: 0 on success, 1 on runtime/calibration failure, 2 on config
// errors, 3 when a requested strictness is infeasible at desk scale.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "tds/harness.hpp"

namespace {

nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw tds::harness::ConfigError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw tds::harness::ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return j;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

int run_command(const std::string& config_path, const std::string& out_dir) {
  auto cfg = tds::harness::parse_config(load_json(config_path));
  auto result = tds::harness::run(cfg);
  std::filesystem::create_directories(out_dir);
  write_file(std::filesystem::path(out_dir) / "trials.csv", result.csv);
  write_file(std::filesystem::path(out_dir) / "summary.json", result.summary.dump(2) + "\n");
  std::cout << result.summary.dump(2) << "\n";
  return 0;
}

int calibrate_command(const std::string& config_path, const std::string& constant,
                      const std::vector<double>& grid, double target,
                      const std::string& out_path) {
  auto cfg = tds::harness::parse_config(load_json(config_path));
  auto cal = tds::harness::calibrate(cfg, constant, grid, target);
  std::cout << cal.report.dump(2) << "\n";
  if (!out_path.empty()) {
    write_file(out_path, cal.report.at("constants").dump(2) + "\n");
  }
  return cal.achieved ? 0 : 1;
}

int report_command(const std::vector<std::string>& csv_paths, const std::string& columns_path) {
  std::vector<std::string> texts;
  for (const auto& path : csv_paths) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open CSV: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    texts.push_back(buf.str());
  }
  auto report = tds::harness::aggregate_csv(texts);
  std::cout << report.table();
  if (!columns_path.empty()) write_file(columns_path, report.gnuplot_columns());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Certified train/test distribution-shift learning harness"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "tds-out";
  auto* run_cmd = app.add_subcommand("run", "run a configured trial battery");
  run_cmd->add_option("-c,--config", config_path, "experiment config JSON")->required();
  run_cmd->add_option("-o,--out", out_dir, "output directory");

  std::string cal_config;
  std::string cal_constant;
  std::vector<double> cal_grid;
  double cal_target = 0.95;
  std::string cal_out;
  auto* cal_cmd = app.add_subcommand("calibrate", "search a constants grid for a completeness target");
  cal_cmd->add_option("-c,--config", cal_config, "experiment config JSON")->required();
  cal_cmd->add_option("--constant", cal_constant, "constant name to tune")->required();
  cal_cmd->add_option("--grid", cal_grid, "candidate values")->required();
  cal_cmd->add_option("--target", cal_target, "required accept rate");
  cal_cmd->add_option("-o,--out", cal_out, "write chosen constants JSON here");

  std::vector<std::string> report_paths;
  std::string columns_path;
  auto* report_cmd = app.add_subcommand("report", "aggregate trial CSVs");
  report_cmd->add_option("csv", report_paths, "trial CSV files")->required();
  report_cmd->add_option("--columns", columns_path, "write plot-ready columns here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) return run_command(config_path, out_dir);
    if (cal_cmd->parsed()) return calibrate_command(cal_config, cal_constant, cal_grid, cal_target, cal_out);
    if (report_cmd->parsed()) return report_command(report_paths, columns_path);
  } catch (const tds::harness::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const tds::StrictnessInfeasibleError& e) {
    std::cerr << "infeasible strictness: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
