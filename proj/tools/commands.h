// tools/commands.h
//
// Subcommands of the dysflux tool. Each returns the process exit code.

#ifndef DYSFLUX_TOOLS_COMMANDS_H_
#define DYSFLUX_TOOLS_COMMANDS_H_

#include <optional>
#include <string>

#include "dysflux/pipeline.h"

namespace dysflux::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitInternal = 3;

struct Options {
  std::string config_path;
  std::string manifest_path;
  std::string out_dir;
  std::string hyp_path;   // directory of <id>.hyp.json, or one JSON object keyed by id
  std::string pred_dir;   // evaluate only
  std::optional<int32_t> order;
  std::optional<int32_t> workers;
  std::optional<uint64_t> seed;
  std::optional<int32_t> count;
};

/// Config file (or defaults) with command-line overrides applied.
PipelineConfig LoadConfig(const Options &opt);

int Simulate(const Options &opt);
int Align(const Options &opt);
int Detect(const Options &opt);
int Evaluate(const Options &opt);
int Run(const Options &opt);

}  // namespace dysflux::cli

#endif  // DYSFLUX_TOOLS_COMMANDS_H_
