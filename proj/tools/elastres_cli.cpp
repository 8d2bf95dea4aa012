// Command-line front end: spectrum | effective | resonances | validate | sweep | field.

#include <CLI11.hpp>
#include <functional>
#include <iostream>
#include <map>

#include "elastres/errors.hpp"
#include "elastres/parallel.hpp"
#include "elastres/pipeline.hpp"

using namespace elastres;

int main(int argc, char** argv) {
  CLI::App app{"Scattering resonances of a high-contrast elastic inclusion"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);
  std::string config_path, out_dir;
  bool cache = false;
  int mesh_level = -1, threads = 0;
  app.add_option("--config", config_path, "Configuration file (key = value)");
  app.add_option("--out", out_dir, "Output directory (overrides output.dir)");
  app.add_flag("--cache", cache, "Reuse cached zero-frequency effective data");
  app.add_option("--mesh-level", mesh_level, "Builtin mesh refinement level (overrides mesh.level)");
  app.add_option("--threads", threads, "Worker threads (overrides threads)");

  const std::map<std::string, std::function<int(Pipeline&)>> commands{
      {"spectrum", cmd_spectrum}, {"effective", cmd_effective}, {"resonances", cmd_resonances},
      {"validate", cmd_validate}, {"sweep", cmd_sweep},         {"field", cmd_field}};
  const std::map<std::string, std::string> help{
      {"spectrum", "Interior Neumann eigenfrequencies in the configured window"},
      {"effective", "Zero-frequency effective matrices and spectral ladder"},
      {"resonances", "Asymptotic and direct resonances for each tau"},
      {"validate", "Structural checks; exit 4 when any fails"},
      {"sweep", "Tau sweep with log-log slope fits of Im z"},
      {"field", "Leading small-resonator field along a ray"}};
  for (const auto& [name, fn] : commands) app.add_subcommand(name, help.at(name));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : exit_code(ErrorKind::Config);
  }
  const std::string command = app.get_subcommands().front()->get_name();

  Config cfg;
  RunConfig run;
  try {
    if (!config_path.empty()) cfg = Config::load(config_path);
    if (mesh_level >= 0) cfg.set("mesh.level", std::to_string(mesh_level));
    if (!out_dir.empty()) cfg.set("output.dir", out_dir);
    if (cache) cfg.set("cache.enabled", "true");
    if (threads > 0) cfg.set("threads", std::to_string(threads));
    run = RunConfig::from(cfg);
  } catch (const Error& e) {
    std::cerr << "elastres: config error: " << e.what() << "\n";
    return exit_code(e.kind());
  }
  set_num_threads(run.threads);

  Pipeline p(run, command, cfg.hash(), cfg.entries());
  try {
    const int rc = commands.at(command)(p);
    p.write_manifest(rc == 0 ? "ok" : "validation-failed");
    if (rc != 0) std::cerr << "elastres: validation failed (see validation.json)\n";
    return rc;
  } catch (const Error& e) {
    std::cerr << "elastres: " << command << " failed at stage '" << p.stage() << "': " << e.what() << "\n";
    p.write_manifest("failed", e.what());
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "elastres: " << command << " failed at stage '" << p.stage() << "': " << e.what() << "\n";
    p.write_manifest("failed", e.what());
    return exit_code(ErrorKind::Numerical);
  }
}
