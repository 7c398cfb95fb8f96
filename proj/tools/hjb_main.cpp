#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "hjb/catalog.hpp"
#include "hjb/config.hpp"

namespace {

void apply_thread_cap() {
#ifdef _OPENMP
  if (const char* env = std::getenv("HJB_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) omp_set_num_threads(n);
  }
#endif
}

std::string read_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw hjb::ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Solver and hypothesis checker for degenerate HJB equations on the torus"};
  app.require_subcommand(1);

  auto* list = app.add_subcommand("list", "Print catalog problem names");

  auto* run = app.add_subcommand("run", "Run a configured job");
  std::string config_file, problem, mode, out_dir;
  std::optional<int> n;
  std::optional<double> t_final;
  run->add_option("config", config_file, "Config file (key = value lines)");
  run->add_option("--problem", problem, "Catalog problem name");
  run->add_option("--mode", mode, "evolve | ergodic | verify | counterexample | full");
  run->add_option("--n", n, "Nodes per axis");
  run->add_option("--t-final", t_final, "Final time of the Cauchy run");
  run->add_option("--out", out_dir, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (list->parsed()) {
    for (const auto& name : hjb::catalog_names()) {
      const auto entry = hjb::build(name);
      std::cout << name << "  " << entry.description << '\n';
    }
    return 0;
  }

  apply_thread_cap();
  hjb::RunConfig cfg;
  try {
    if (!config_file.empty()) {
      cfg = hjb::parse_config(read_file(config_file));
    } else if (problem.empty() || mode.empty()) {
      throw hjb::ConfigError("without a config file both --problem and --mode are required");
    }
    const std::string where = "command line: ";
    if (!problem.empty()) hjb::set_config_key(cfg, "problem", problem, where);
    if (!mode.empty()) hjb::set_config_key(cfg, "mode", mode, where);
    if (n) hjb::set_config_key(cfg, "n_per_axis", std::to_string(*n), where);
    if (t_final) cfg.t_final = *t_final;
    if (!out_dir.empty()) hjb::set_config_key(cfg, "out_dir", out_dir, where);
    hjb::validate(cfg);
  } catch (const hjb::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }

  try {
    return hjb::run(cfg, std::cout);
  } catch (const hjb::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }
}
