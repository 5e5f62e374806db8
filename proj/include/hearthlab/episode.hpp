#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "hearthlab/activity.hpp"
#include "hearthlab/embed.hpp"
#include "hearthlab/network.hpp"
#include "hearthlab/ppo.hpp"
#include "hearthlab/rng.hpp"

namespace hearth {

struct RewardParams {
  double c = 200.0;
  double invalid_penalty = -1.0;
  int max_steps = 64;
};

// -1 (invalid_penalty) for a non-executable action, otherwise the change in
// best-grounding progress scaled by c.
double reward(const WorldState& prev, bool executed, const WorldState& next,
              const GroundedGoal& goal, const RewardParams& params);

// Executability masks for invalid-action masking.
std::vector<std::uint8_t> primitive_mask(const WorldState& state,
                                         const Scene& scene);
std::vector<std::uint8_t> object_mask(const WorldState& state,
                                      const Scene& scene, Primitive p);

class Environment {
 public:
  Environment(const Activity& activity, RewardParams params,
              int feature_dim = 512);

  void reset();
  const WorldState& state() const { return state_; }
  const Activity& activity() const { return *activity_; }
  int steps() const { return steps_; }
  // Features of the current state text plus the goal text.
  FeatureVector observe() const;

  struct Step {
    double reward = 0.0;
    bool executed = false;
    bool success = false;
    bool done = false;  // success or step cap
  };
  Step step(const Action& action, Rng& rng);

 private:
  const Activity* activity_;
  RewardParams params_;
  int feature_dim_;
  HashedFeatures goal_features_;
  WorldState state_;
  int steps_ = 0;
};

struct EpisodeResult {
  std::vector<Transition> trajectory;
  double total = 0.0;
  int steps = 0;
  bool success = false;
};

using ActionChooser = std::function<Action(const WorldState&)>;

// Rolls out a fixed chooser (scripted or random policies).
EpisodeResult run_episode(const Activity& activity,
                          const ActionChooser& choose,
                          const RewardParams& params, Rng& rng);

// Samples from the policy network. Environment transitions and action
// sampling draw from separate streams so replays are comparable.
EpisodeResult run_episode(const Activity& activity, const PolicyParams& policy,
                          const RewardParams& params, Rng& env_rng,
                          Rng& policy_rng, bool mask_invalid = false);

// Draws one action from the network, honoring masks when requested.
Transition act(const PolicyParams& policy, const FeatureVector& features,
               const WorldState& state, const Scene& scene, Rng& rng,
               bool mask_invalid);

}  // namespace hearth
