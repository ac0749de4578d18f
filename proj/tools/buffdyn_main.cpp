// buffdyn: batch experiments on Buff forms, rectifying coordinates and
// external rays. Subcommands run a config file and emit JSON/CSV/SVG.
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "buffdyn/experiments.hpp"

namespace fs = std::filesystem;
using namespace buffdyn;

namespace {

int resolve_threads(int flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("BUFFDYN_THREADS")) {
    int n = std::atoi(env);
    if (n > 0) return n;
  }
  return int(std::thread::hardware_concurrency());
}

void write_file(const fs::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(errc::io_error, "cannot write " + path.string());
  out << contents;
}

int run_config(const std::string& config_path, const std::string& forced_kind,
               const std::string& out_dir, int threads, bool verbose) {
  auto t0 = std::chrono::steady_clock::now();
  Config config = cfg::parse_file(config_path);
  if (!forced_kind.empty()) {
    std::string kind = cfg::get_string(config.global(), "experiment", "");
    if (kind.empty()) {
      config.sections.front().entries.emplace_back("experiment", forced_kind);
    } else if (kind != forced_kind) {
      fail(errc::config_parse,
           "config declares experiment '" + kind + "' but the subcommand wants '" +
               forced_kind + "'");
    }
  }

  RunOutput out = run_experiment(config, threads);

  fs::create_directories(out_dir);
  fs::path dir(out_dir);
  write_file(dir / (out.experiment + "_report.json"), out.report.dump(2) + "\n");
  for (const auto& table : out.tables)
    write_file(dir / (out.experiment + "_" + table.name + ".csv"), table.to_csv());
  for (const auto& [name, svg] : out.figures) write_file(dir / name, svg);

  double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cout << out.experiment << ": " << (out.exit_code == 0 ? "pass" : "FAIL") << " ("
            << out_dir << "/" << out.experiment << "_report.json)\n";
  if (verbose) {
    std::cout << out.report.dump(2) << "\n";
    std::cout << "wall-clock: " << wall << " s\n";
  }
  return out.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"buffdyn: near-parabolic dynamics experiments"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out_dir = ".";
  int threads = 0;
  bool verbose = false;
  app.add_option("--out-dir", out_dir, "output directory")->capture_default_str();
  app.add_option("--threads", threads, "worker threads (default: BUFFDYN_THREADS or cores)");
  app.add_flag("--verbose", verbose, "print the full report to stdout");

  auto add = [&](const char* name, const char* help) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("config", config_path, "experiment config file")->required();
    return sub;
  };
  CLI::App* cmd_run = add("run", "run the experiment declared in the config");
  CLI::App* cmd_portrait = add("portrait", "render a phase portrait");
  CLI::App* cmd_spiral = add("spiral", "render a lifted-circle spiral with its audit");
  CLI::App* cmd_audit = add("audit-residues", "compare closed-form and numeric residues");

  CLI11_PARSE(app, argc, argv);

  std::string forced;
  if (cmd_portrait->parsed()) forced = "phase_portrait";
  if (cmd_spiral->parsed()) forced = "spiral";
  if (cmd_audit->parsed()) forced = "residue_audit";
  (void)cmd_run;

  try {
    return run_config(config_path, forced, out_dir, resolve_threads(threads), verbose);
  } catch (const error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
