#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hearthlab/train.hpp"
#include "hearthlab/transfer.hpp"

namespace hearth {

struct RunConfig {
  TrainConfig train;
  int seeds = 3;
  std::uint64_t seed = 0;
  int jobs = 0;  // 0 = logical cores
  std::string out = "out";
  std::vector<int> checkpoints{80, 160};
  std::string embedding_provider = "hashed";
  int embedding_dim = 256;
  double offset = 64.0;
  bool keep_primitive_head = false;
  bool self_sanity = false;
  Aggregation aggregation = Aggregation::kMedian;
};

// Returns the value of a `HEARTHLAB_*` variable, or nullopt.
using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
EnvLookup process_env();

// Layers, lowest first: defaults, config file, environment. Flags are applied
// by run_cli on top. Throws UsageError on bad values.
void apply_config_json(RunConfig& cfg, const std::string& json_text,
                       const std::string& origin);
void apply_env(RunConfig& cfg, const EnvLookup& env);
void check_config(const RunConfig& cfg);

// Exit codes: 0 ok, 1 runtime failure, 2 usage or load error.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err, const EnvLookup& env = process_env());

}  // namespace hearth
