#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hearthlab/activity.hpp"
#include "hearthlab/episode.hpp"
#include "hearthlab/network.hpp"
#include "hearthlab/ppo.hpp"

namespace hearth {

struct LearningCurve {
  std::string activity;
  std::uint64_t seed = 0;
  std::vector<double> totals;
  std::vector<int> steps;
  std::vector<std::uint8_t> successes;

  std::size_t size() const { return totals.size(); }
  // Mean total over the last `window` episodes (fewer if the curve is short).
  double final_mean(std::size_t window = 64) const;
  bool operator==(const LearningCurve&) const = default;
};

struct TrainConfig {
  int episodes = 512;
  int feature_dim = 512;
  int hidden_dim = 128;
  RewardParams reward;
  PpoHyper ppo;
  bool mask_invalid = false;
};

struct TrainResult {
  LearningCurve curve;
  PolicyParams params;
};

// PPO from a fresh network, or from `init` (e.g. a transplanted source
// policy). Reproducible from `seed`.
TrainResult train(const Activity& activity, const TrainConfig& config,
                  std::uint64_t seed,
                  const std::optional<PolicyParams>& init = std::nullopt);

// Stream ids for Rng::derive; one independent stream per purpose.
enum class SeedStream : std::uint64_t {
  kInit = 0,
  kEnvironment = 1,
  kPolicy = 2,
  kMinibatch = 3,
  kTransplant = 4,
};

inline std::uint64_t stream_seed(std::uint64_t seed, SeedStream s) {
  return Rng::derive(seed, static_cast<std::uint64_t>(s));
}

}  // namespace hearth
