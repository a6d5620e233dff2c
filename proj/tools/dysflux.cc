// tools/dysflux.cc
//
// Command-line entry point: dysflux {simulate,align,detect,evaluate,run}.

#include <cstdlib>
#include <iostream>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "commands.h"

namespace {

void SetUpLogging() {
  auto logger = spdlog::stderr_color_mt("dysflux");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::info);
  if (const char *env = std::getenv("DYSFLUX_LOG")) {
    const auto level = spdlog::level::from_str(env);
    // from_str maps unknown names to "off"; only accept that when asked.
    if (level != spdlog::level::off || std::string_view(env) == "off") {
      spdlog::set_level(level);
    } else {
      spdlog::warn("unknown DYSFLUX_LOG level \"{}\"", env);
    }
  }
}

}  // namespace

int main(int argc, char **argv) {
  using namespace dysflux::cli;
  SetUpLogging();

  CLI::App app{"Disfluency alignment, detection, simulation and evaluation"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App *sub) {
    sub->add_option("--config", opt.config_path, "Pipeline config JSON")->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out_dir, "Output directory")->required();
    sub->add_option("--workers", opt.workers, "Utterances processed in parallel")
        ->check(CLI::PositiveNumber);
    sub->add_option("--seed", opt.seed, "Random seed");
  };
  auto add_manifest = [&](CLI::App *sub, bool required) {
    auto *o = sub->add_option("--manifest", opt.manifest_path, "Dataset manifest JSON");
    if (required) o->required();
  };
  auto add_order = [&](CLI::App *sub) {
    sub->add_option("--order", opt.order, "Highest recursion order")->check(CLI::NonNegativeNumber);
  };
  auto add_hyp = [&](CLI::App *sub) {
    sub->add_option("--hyp", opt.hyp_path,
                     "ASR hypotheses: a directory of <id>.hyp.json or a JSON object keyed by id");
  };

  auto *simulate = app.add_subcommand("simulate", "Generate a synthetic disfluent corpus");
  add_common(simulate);
  simulate->add_option("--count", opt.count, "Number of utterances")->check(CLI::NonNegativeNumber);

  auto *align = app.add_subcommand("align", "Recursive alignment and word segmentation");
  add_common(align);
  add_manifest(align, true);
  add_order(align);

  auto *detect = app.add_subcommand("detect", "Phoneme- and word-level disfluency events");
  add_common(detect);
  add_manifest(detect, true);
  add_order(detect);
  add_hyp(detect);

  auto *evaluate = app.add_subcommand("evaluate", "Score predictions against ground truth");
  add_common(evaluate);
  add_manifest(evaluate, true);
  evaluate->add_option("--pred", opt.pred_dir, "Directory written by align and detect")->required();

  auto *run = app.add_subcommand("run", "Simulate (without --manifest), align, detect, evaluate");
  add_common(run);
  add_manifest(run, false);
  add_order(run);
  add_hyp(run);
  run->add_option("--count", opt.count, "Number of simulated utterances")
      ->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*simulate) return Simulate(opt);
    if (*align) return Align(opt);
    if (*detect) return Detect(opt);
    if (*evaluate) return Evaluate(opt);
    if (*run) return Run(opt);
  } catch (const dysflux::DataError &e) {
    spdlog::error("{}", e.what());
    return kExitData;
  } catch (const std::exception &e) {
    spdlog::critical("internal error: {}", e.what());
    return kExitInternal;
  }
  return kExitUsage;
}
