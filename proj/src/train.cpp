#include "hearthlab/train.hpp"

#include <algorithm>
#include <numeric>

namespace hearth {

double LearningCurve::final_mean(std::size_t window) const {
  if (totals.empty()) return 0.0;
  const std::size_t n = std::min(window, totals.size());
  return std::accumulate(totals.end() - static_cast<std::ptrdiff_t>(n),
                         totals.end(), 0.0) /
         static_cast<double>(n);
}

TrainResult train(const Activity& activity, const TrainConfig& config,
                  std::uint64_t seed, const std::optional<PolicyParams>& init) {
  if (config.episodes < 1) throw std::invalid_argument("episodes must be >= 1");
  const int num_objects = activity.scene.size();

  Rng init_rng(stream_seed(seed, SeedStream::kInit));
  Rng env_rng(stream_seed(seed, SeedStream::kEnvironment));
  Rng policy_rng(stream_seed(seed, SeedStream::kPolicy));
  Rng batch_rng(stream_seed(seed, SeedStream::kMinibatch));

  TrainResult result;
  result.curve.activity = activity.name;
  result.curve.seed = seed;
  if (init) {
    if (init->num_objects() != num_objects ||
        init->feature_dim() != config.feature_dim) {
      throw std::invalid_argument(
          "initial policy shape does not match activity '" + activity.name +
          "'");
    }
    result.params = *init;
  } else {
    result.params = init_params(config.feature_dim, config.hidden_dim,
                                num_objects, init_rng);
  }
  PolicyParams& params = result.params;
  Adam optimizer(params, config.ppo.learning_rate, config.ppo.adam_eps);

  Environment env(activity, config.reward, config.feature_dim);
  std::vector<Transition> rollout;
  rollout.reserve(config.ppo.rollout_steps);
  double episode_total = 0.0;
  FeatureVector obs = env.observe();

  while (static_cast<int>(result.curve.size()) < config.episodes) {
    Transition tr = act(params, obs, env.state(), activity.scene, policy_rng,
                        config.mask_invalid);
    const Environment::Step s = env.step(tr.action, env_rng);
    episode_total += s.reward;
    tr.reward = s.reward;
    tr.done = s.done;

    if (s.done) {
      if (!s.success) {
        // Step cap is a time limit, not a terminal state: bootstrap.
        tr.reward += config.ppo.gamma * forward(params, env.observe()).value;
      }
      result.curve.totals.push_back(episode_total);
      result.curve.steps.push_back(env.steps());
      result.curve.successes.push_back(s.success ? 1 : 0);
      episode_total = 0.0;
      env.reset();
    }
    obs = env.observe();
    rollout.push_back(std::move(tr));

    if (static_cast<int>(rollout.size()) == config.ppo.rollout_steps) {
      const double last_value =
          rollout.back().done ? 0.0 : forward(params, obs).value;
      std::vector<double> rewards, values;
      std::vector<std::uint8_t> dones;
      for (const Transition& t : rollout) {
        rewards.push_back(t.reward);
        values.push_back(t.value);
        dones.push_back(t.done ? 1 : 0);
      }
      const Advantages adv =
          compute_gae(rewards, values, dones, last_value, config.ppo.gamma,
                      config.ppo.gae_lambda);
      ppo_update(params, optimizer, rollout, adv, config.ppo, batch_rng);
      rollout.clear();
    }
  }
  return result;
}

}  // namespace hearth
