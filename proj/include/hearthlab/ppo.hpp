#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hearthlab/network.hpp"
#include "hearthlab/rng.hpp"

namespace hearth {

struct PpoHyper {
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip = 0.2;
  int epochs = 4;
  int minibatch = 64;
  double learning_rate = 3e-4;
  double value_coef = 0.5;
  double entropy_coef = 0.01;
  double max_grad_norm = 0.5;
  double adam_eps = 1e-5;
  int rollout_steps = 512;
  bool normalize_advantage = true;
};

struct Transition {
  FeatureVector features;
  Action action;
  double logprob = 0.0;
  double reward = 0.0;
  double value = 0.0;
  bool done = false;  // last step of an episode (success or step cap)
  // Present only when invalid-action masking is on. The object mask is the
  // one that applied to the sampled primitive.
  std::vector<std::uint8_t> prim_mask;
  std::vector<std::uint8_t> obj_mask;
};

struct Advantages {
  std::vector<double> advantages;
  std::vector<double> returns;
};

// Generalized advantage estimation over a rollout. `dones[t]` ends the
// episode after step t; `last_value` bootstraps a rollout that stops mid
// episode.
Advantages compute_gae(std::span<const double> rewards,
                       std::span<const double> values,
                       std::span<const std::uint8_t> dones, double last_value,
                       double gamma, double lambda);

// One row of the PPO loss.
struct LossSample {
  const Transition* transition = nullptr;
  double advantage = 0.0;
  double ret = 0.0;
};

struct LossStats {
  double loss = 0.0;
  double surrogate = 0.0;   // mean clipped surrogate (maximized)
  double value_loss = 0.0;  // mean squared value error
  double entropy = 0.0;
  double clip_fraction = 0.0;
};

// Mean clipped-surrogate loss with value and entropy terms:
//   -surrogate + value_coef * value_loss - entropy_coef * entropy.
// Adds d loss / d params into `grad` when it is non-null.
LossStats ppo_loss(const PolicyParams& params,
                   std::span<const LossSample> batch, const PpoHyper& hyper,
                   PolicyParams* grad);

class Adam {
 public:
  Adam(const PolicyParams& shape, double learning_rate, double eps);
  // Gradient descent step on `params`.
  void step(PolicyParams& params, const PolicyParams& grad);

 private:
  double lr_;
  double eps_;
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  long t_ = 0;
  PolicyParams m_;
  PolicyParams v_;
};

// Scales `grad` so its global L2 norm is at most max_norm; returns the norm
// before clipping.
double clip_grad_norm(PolicyParams& grad, double max_norm);

struct UpdateStats {
  double surrogate = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  int minibatches = 0;
};

// Several epochs of shuffled minibatch updates over one rollout.
// Throws NumericError naming the minibatch when the loss stops being finite.
UpdateStats ppo_update(PolicyParams& params, Adam& optimizer,
                       std::span<const Transition> batch,
                       const Advantages& adv, const PpoHyper& hyper,
                       Rng& rng);

}  // namespace hearth
