// Command-line front end. Uses only the C interface.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "eisenhart/eisenhart.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitCheckFailed = 4;

int report_error(eh_status status) {
  std::fprintf(stderr, "error [%s]: %s\n", eh_status_name(status), eh_last_error());
  return eh_status_is_config(status) ? kExitConfig : kExitNumerical;
}

void summarize(const char* report) {
  std::istringstream in(report);
  std::string line;
  while (std::getline(in, line)) {
    const auto row = nlohmann::json::parse(line, nullptr, false);
    if (row.is_discarded()) continue;
    std::fprintf(stderr, "%-4s %-28s %.3e  tol %.0e\n", row.value("status", "?").c_str(),
                 row.value("check", "?").c_str(), row.value("residual", 0.0), row.value("tol", 0.0));
  }
}

// JSON lines go to stdout, a one-line-per-check summary to stderr.
int finish(char* report, int all_passed, bool quiet) {
  if (report) {
    if (!quiet) {
      std::fputs(report, stdout);
      summarize(report);
    }
    eh_string_free(report);
  }
  if (!all_passed) {
    std::fprintf(stderr, "one or more checks failed\n");
    return kExitCheckFailed;
  }
  return kExitOk;
}

int cmd_run(const std::string& path, const std::string& out_dir, bool quiet) {
  eh_scenario* sc = nullptr;
  eh_status st = eh_scenario_load(path.c_str(), &sc);
  if (st != EH_OK) return report_error(st);
  char* report = nullptr;
  int passed = 0;
  st = eh_scenario_run(sc, out_dir.empty() ? nullptr : out_dir.c_str(), &report, &passed);
  eh_scenario_free(sc);
  if (st != EH_OK) return report_error(st);
  return finish(report, passed, quiet);
}

int cmd_check(const std::string& path, const std::vector<std::string>& checks, bool quiet) {
  eh_scenario* sc = nullptr;
  eh_status st = eh_scenario_load(path.c_str(), &sc);
  if (st != EH_OK) return report_error(st);
  std::vector<const char*> names;
  for (const auto& c : checks) names.push_back(c.c_str());
  char* report = nullptr;
  int passed = 0;
  st = eh_scenario_check(sc, names.data(), names.size(), &report, &passed);
  eh_scenario_free(sc);
  if (st != EH_OK) return report_error(st);
  return finish(report, passed, quiet);
}

int cmd_list(bool json) {
  char* text = nullptr;
  const eh_status st = eh_catalog_list(json ? 1 : 0, &text);
  if (st != EH_OK) return report_error(st);
  std::fputs(text, stdout);
  eh_string_free(text);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Eisenhart lift of action-dependent Lagrangians"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(eh_version()));

  std::string path, out_dir;
  std::vector<std::string> checks;
  bool json = false, quiet = false;

  auto* run = app.add_subcommand("run", "integrate a scenario and write trajectories and a report");
  run->add_option("scenario", path, "scenario JSON file")->required();
  run->add_option("-o,--out", out_dir, "output directory (default: out_dir of the scenario)");
  run->add_flag("-q,--quiet", quiet, "no report on stdout or summary on stderr");

  auto* check = app.add_subcommand("check", "evaluate checks on a scenario");
  check->add_option("scenario", path, "scenario JSON file")->required();
  check->add_option("checks", checks, "check names (default: the scenario's list)");
  check->add_flag("-q,--quiet", quiet, "no report on stdout or summary on stderr");

  auto* list = app.add_subcommand("list", "list catalog systems, generators and checks");
  list->add_flag("--json", json, "machine-readable output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  if (*run) return cmd_run(path, out_dir, quiet);
  if (*check) return cmd_check(path, checks, quiet);
  return cmd_list(json);
}
