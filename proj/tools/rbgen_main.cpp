#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "rbgen/config.hpp"
#include "rbgen/errors.hpp"
#include "rbgen/harness.hpp"
#include "rbgen/text_format.hpp"

namespace {

constexpr int kExitCorrect = 0;
constexpr int kExitNoCorrect = 1;
constexpr int kExitConfigError = 2;
constexpr int kExitResourceError = 3;

rbgen::RunConfig config_or_defaults(const std::string& path) {
  if (path.empty()) return rbgen::RunConfig{};
  return rbgen::load_config(path);
}

int do_learn(const std::string& config_path, bool resume, std::optional<std::uint64_t> seed) {
  rbgen::RunConfig cfg = config_or_defaults(config_path);
  if (seed) cfg.generation.seed = *seed;
  const rbgen::LearnResult result = rbgen::run_learn(cfg, resume);
  for (const auto& s : result.report.sims) {
    std::cout << "sim " << s.index << ": algorithms " << s.algorithms << ", correct "
              << s.correct << ", incorrect " << s.incorrect << "\n";
  }
  if (result.report.best_sim) {
    const auto& best = result.report.sims[*result.report.best_sim];
    std::cout << "best algorithm: sim " << best.index << ", episode " << best.best->episode
              << ", reward " << best.best->reward << "\n";
    std::cout << "artifacts written to " << cfg.output.directory << "\n";
    return kExitCorrect;
  }
  std::cout << "no correct algorithm found\n";
  return kExitNoCorrect;
}

int do_validate(const std::string& algorithm_path, const std::string& config_path) {
  const rbgen::RunConfig cfg = config_or_defaults(config_path);
  const rbgen::ValidateResult res = rbgen::run_validate(algorithm_path, cfg);
  std::cout << res.text;
  return res.verdict.correct ? kExitCorrect : kExitNoCorrect;
}

int do_render(const std::string& algorithm_path) {
  std::cout << rbgen::render_pseudocode(rbgen::load_algorithm_file(algorithm_path));
  return kExitCorrect;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rbgen: learns and validates reliable-broadcast algorithms"};
  app.require_subcommand(1);

  std::string config_path;
  std::string algorithm_path;
  bool resume = false;
  std::optional<std::uint64_t> seed;

  CLI::App* learn = app.add_subcommand("learn", "run the configured learning simulations");
  learn->add_option("-c,--config", config_path, "run configuration file");
  learn->add_flag("--resume", resume, "continue from existing checkpoints");
  learn->add_option("--seed", seed, "override generation.seed");

  CLI::App* validate =
      app.add_subcommand("validate", "check one algorithm file against the oracle");
  validate->add_option("algorithm", algorithm_path, "algorithm text file")->required();
  validate->add_option("-c,--config", config_path, "run configuration file");

  CLI::App* render = app.add_subcommand("render", "parse and pretty-print an algorithm file");
  render->add_option("algorithm", algorithm_path, "algorithm text file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfigError;
  }

  try {
    if (learn->parsed()) return do_learn(config_path, resume, seed);
    if (validate->parsed()) return do_validate(algorithm_path, config_path);
    if (render->parsed()) return do_render(algorithm_path);
  } catch (const rbgen::ResourceLimitError& e) {
    std::cerr << "resource limit: " << e.what() << " (states seen: " << e.states_seen()
              << ")\n";
    return kExitResourceError;
  } catch (const rbgen::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const rbgen::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
  return kExitConfigError;
}
