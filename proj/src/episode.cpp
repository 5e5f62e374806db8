#include "hearthlab/episode.hpp"

#include <cmath>

#include "hearthlab/render.hpp"

namespace hearth {

namespace {

// c * progress fraction on a 2^-32 grid. Grid values add and subtract
// exactly, so episode totals telescope without rounding drift.
double scaled_progress(const WorldState& s, const GroundedGoal& goal,
                       double c) {
  constexpr double kGrid = 4294967296.0;
  return std::nearbyint(c * progress(s, goal).fraction() * kGrid) / kGrid;
}

}  // namespace

double reward(const WorldState& prev, bool executed, const WorldState& next,
              const GroundedGoal& goal, const RewardParams& params) {
  if (!executed) return params.invalid_penalty;
  if (prev == next) return 0.0;
  return scaled_progress(next, goal, params.c) -
         scaled_progress(prev, goal, params.c);
}

std::vector<std::uint8_t> primitive_mask(const WorldState& state,
                                         const Scene& scene) {
  std::vector<std::uint8_t> mask(kNumPrimitives, 0);
  for (int p = 0; p < kNumPrimitives; ++p) {
    for (ObjectIndex o = 0; o < scene.size(); ++o) {
      if (executable(state, scene, {static_cast<Primitive>(p), o})) {
        mask[p] = 1;
        break;
      }
    }
  }
  return mask;
}

std::vector<std::uint8_t> object_mask(const WorldState& state,
                                      const Scene& scene, Primitive p) {
  std::vector<std::uint8_t> mask(scene.size(), 0);
  for (ObjectIndex o = 0; o < scene.size(); ++o) {
    mask[o] = executable(state, scene, {p, o}) ? 1 : 0;
  }
  return mask;
}

Environment::Environment(const Activity& activity, RewardParams params,
                         int feature_dim)
    : activity_(&activity), params_(params), feature_dim_(feature_dim),
      goal_features_(feature_dim) {
  if (params_.c <= 0.0) throw std::invalid_argument("reward scale c must be > 0");
  if (params_.max_steps < 1) throw std::invalid_argument("max_steps must be >= 1");
  goal_features_.add_tokens(tokenize(activity.goal_text()), "g:");
  reset();
}

void Environment::reset() {
  state_ = activity_->initial;
  steps_ = 0;
}

FeatureVector Environment::observe() const {
  // Integer-valued buckets make the addition order irrelevant, so this
  // equals featurize(state_text, goal_text).
  HashedFeatures features = goal_features_;
  features.add_tokens(tokenize(render_state(state_, activity_->scene)), "s:");
  return features.normalized();
}

Environment::Step Environment::step(const Action& action, Rng& rng) {
  StepResult r = apply_action(state_, activity_->scene, action,
                              activity_->action_model, rng);
  Step out;
  out.executed = r.executed;
  out.reward = reward(state_, r.executed, r.next, activity_->grounded, params_);
  state_ = std::move(r.next);
  ++steps_;
  out.success = progress(state_, activity_->grounded).success;
  out.done = out.success || steps_ >= params_.max_steps;
  return out;
}

EpisodeResult run_episode(const Activity& activity,
                          const ActionChooser& choose,
                          const RewardParams& params, Rng& rng) {
  Environment env(activity, params, 2);
  EpisodeResult result;
  for (;;) {
    const Environment::Step s = env.step(choose(env.state()), rng);
    result.total += s.reward;
    if (s.done) {
      result.success = s.success;
      break;
    }
  }
  result.steps = env.steps();
  return result;
}

Transition act(const PolicyParams& policy, const FeatureVector& features,
               const WorldState& state, const Scene& scene, Rng& rng,
               bool mask_invalid) {
  const ForwardPass fp = forward(policy, features);
  Transition tr;
  tr.features = features;
  tr.value = fp.value;
  if (!mask_invalid) {
    const SampledAction s = sample_action(fp.prim_logits, fp.obj_logits, rng);
    tr.action = s.action;
    tr.logprob = s.logprob;
    return tr;
  }
  tr.prim_mask = primitive_mask(state, scene);
  bool any = false;
  for (auto m : tr.prim_mask) any = any || m;
  if (!any) {
    // Nothing is executable: fall back to the unmasked distribution.
    tr.prim_mask.clear();
    const SampledAction s = sample_action(fp.prim_logits, fp.obj_logits, rng);
    tr.action = s.action;
    tr.logprob = s.logprob;
    return tr;
  }
  const Categorical prim(fp.prim_logits, tr.prim_mask);
  const int p = prim.sample(rng);
  tr.obj_mask = object_mask(state, scene, static_cast<Primitive>(p));
  const Categorical obj(fp.obj_logits, tr.obj_mask);
  const int o = obj.sample(rng);
  tr.action = {static_cast<Primitive>(p), o};
  tr.logprob = prim.log_probs[p] + obj.log_probs[o];
  return tr;
}

EpisodeResult run_episode(const Activity& activity, const PolicyParams& policy,
                          const RewardParams& params, Rng& env_rng,
                          Rng& policy_rng, bool mask_invalid) {
  if (policy.num_objects() != activity.scene.size()) {
    throw std::invalid_argument("policy object head has " +
                                std::to_string(policy.num_objects()) +
                                " outputs but the scene has " +
                                std::to_string(activity.scene.size()) +
                                " objects");
  }
  Environment env(activity, params, policy.feature_dim());
  EpisodeResult result;
  for (;;) {
    Transition tr = act(policy, env.observe(), env.state(), activity.scene,
                        policy_rng, mask_invalid);
    const Environment::Step s = env.step(tr.action, env_rng);
    tr.reward = s.reward;
    tr.done = s.done;
    result.total += s.reward;
    result.trajectory.push_back(std::move(tr));
    if (s.done) {
      result.success = s.success;
      break;
    }
  }
  result.steps = env.steps();
  return result;
}

}  // namespace hearth
