#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "apframe/cli.hpp"
#include "apframe/parallel.hpp"

namespace cli = apframe::cli;

int main(int argc, char** argv) {
  CLI::App app{"apframe: affine AP-frame and fractional smoothness experiments"};
  app.set_version_flag("--version", APFRAME_VERSION);
  app.require_subcommand(1);

  std::string config;
  unsigned threads = apframe::default_threads();
  std::string out = ".";
  bool plot = false;

  const char* kinds[] = {"frame-bounds", "ap-check", "ergodic", "smoothness", "simulate", "validate"};
  for (const char* k : kinds) {
    auto* sub = app.add_subcommand(k, std::string("run the ") + k + " experiment");
    sub->add_option("--config", config, "experiment config (JSON)")->required();
    sub->add_option("--threads", threads, "worker threads")->check(CLI::Range(1u, 1024u));
    sub->add_option("--out", out, "output directory");
    sub->add_flag("--plot", plot, "write SVG plots");
  }
  app.get_subcommand("validate")->description("static checks of a config; never runs numerics");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  const std::string sub = app.get_subcommands().front()->get_name();
  const std::string base = std::filesystem::path(config).parent_path().string();
  const std::string base_dir = base.empty() ? "." : base;

  try {
    const nlohmann::json raw = cli::load_config_file(config);
    if (sub == "validate") {
      const auto diags = cli::validate(raw, base_dir);
      for (const auto& d : diags) std::cout << d << '\n';
      if (diags.empty()) std::cout << "ok\n";
      return diags.empty() ? 0 : 1;
    }
    cli::ExperimentConfig cfg = cli::config_from_json(raw);
    if (cfg.experiment != sub) {
      std::cerr << "experiment: config declares '" << cfg.experiment << "' but subcommand is '" << sub << "'\n";
      return 1;
    }
    const auto diags = cli::validate(raw, base_dir);
    if (!diags.empty()) {
      for (const auto& d : diags) std::cerr << d << '\n';
      return 1;
    }
    const auto res = cli::run(cfg, {threads, out, plot}, base_dir);
    const auto& v = res.report.at("verdict");
    std::cout << (v.at("pass").get<bool>() ? "PASS" : "FAIL") << ": " << v.at("reason").get<std::string>() << '\n';
    for (const auto& f : res.files) std::cout << "  wrote " << f << '\n';
    return res.exit_code;
  } catch (const cli::ConfigError& e) {
    std::cerr << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
