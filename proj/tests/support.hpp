#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "hearthlab/activity.hpp"
#include "hearthlab/network.hpp"
#include "hearthlab/ppo.hpp"
#include "hearthlab/rng.hpp"

namespace testing_support {

inline std::string source_path(const std::string& rel) {
  return std::string(HEARTHLAB_SOURCE_DIR) + "/" + rel;
}

inline hearth::Activity catalog_activity(const std::string& file_stem) {
  return hearth::load_activity(source_path("catalog/" + file_stem + ".act"));
}

// The cupboard scene with ids from the figure, used across modules.
inline const char* kCupboardLite = R"({
  "name": "cupboard_lite",
  "objects": [
    {"id": "top_cabinet_47", "category": "cabinet", "properties": ["openable", "container", "surface"]},
    {"id": "bottom_cabinet_41", "category": "cabinet", "properties": ["openable", "container", "surface"]},
    {"id": "countertop_26", "category": "countertop", "properties": ["surface"]},
    {"id": "bath_towel_0", "category": "bath_towel", "properties": ["graspable", "cleaning_tool"]},
    {"id": "bowl_0", "category": "bowl", "properties": ["graspable"]},
    {"id": "cup_0", "category": "cup", "properties": ["graspable"]}
  ],
  "initial": [
    ["dusty", "top_cabinet_47"], ["inreach", "top_cabinet_47"],
    ["inreach", "bottom_cabinet_41"],
    ["ontop", "bath_towel_0", "countertop_26"], ["under", "countertop_26", "bath_towel_0"],
    ["inreach", "bath_towel_0"],
    ["ontop", "bowl_0", "countertop_26"], ["inreach", "bowl_0"],
    ["inside", "cup_0", "bottom_cabinet_41"], ["inreach", "cup_0"]
  ],
  "goal": ["forall", "cabinet", "c", ["not", ["dusty", "c"]]]
})";

// Random network plus a random PPO batch. Stored log-probs are jittered
// around the current ones so both clip branches get exercised; samples
// within 1e-3 of a clip edge are redrawn since the loss has a kink there.
struct GradProblem {
  hearth::PolicyParams params;
  std::vector<hearth::Transition> transitions;
  std::vector<hearth::LossSample> batch;
};

inline GradProblem random_grad_problem(hearth::Rng& rng, int F, int H, int K,
                                       int n, bool masks) {
  using namespace hearth;
  GradProblem gp;
  gp.params = init_params(F, H, K, rng, 1.0);
  for (auto t : gp.params.tensors()) {
    for (double& v : t) v += 0.1 * rng.normal();
  }
  PpoHyper hyper;
  gp.transitions.reserve(n);
  while (static_cast<int>(gp.transitions.size()) < n) {
    Transition tr;
    tr.features.resize(F);
    for (double& v : tr.features) v = rng.uniform() < 0.5 ? 0.0 : rng.normal();
    tr.action = {static_cast<Primitive>(rng.below(kNumPrimitives)),
                 static_cast<int>(rng.below(K))};
    if (masks) {
      tr.prim_mask.assign(kNumPrimitives, 0);
      tr.obj_mask.assign(K, 0);
      for (auto& m : tr.prim_mask) m = rng.uniform() < 0.6;
      for (auto& m : tr.obj_mask) m = rng.uniform() < 0.6;
      tr.prim_mask[static_cast<int>(tr.action.primitive)] = 1;
      tr.obj_mask[tr.action.object] = 1;
    }
    const ForwardPass fp = forward(gp.params, tr.features);
    const Categorical prim(fp.prim_logits, tr.prim_mask);
    const Categorical obj(fp.obj_logits, tr.obj_mask);
    const double logp = prim.log_probs[static_cast<int>(tr.action.primitive)] +
                        obj.log_probs[tr.action.object];
    tr.logprob = logp + 0.3 * rng.normal();
    const double ratio = std::exp(logp - tr.logprob);
    if (std::abs(ratio - (1.0 + hyper.clip)) < 1e-3 ||
        std::abs(ratio - (1.0 - hyper.clip)) < 1e-3) {
      continue;
    }
    gp.transitions.push_back(std::move(tr));
  }
  for (const Transition& tr : gp.transitions) {
    gp.batch.push_back({&tr, rng.normal(), rng.normal()});
  }
  return gp;
}

// Largest relative disagreement between the analytic PPO loss gradient and
// central differences, over every parameter.
inline double ppo_gradient_error(GradProblem& gp, double h = 1e-6) {
  using namespace hearth;
  PpoHyper hyper;
  PolicyParams grad = gp.params.zeros_like();
  ppo_loss(gp.params, gp.batch, hyper, &grad);
  auto p = gp.params.tensors();
  auto g = grad.tensors();
  double worst = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    for (std::size_t i = 0; i < p[k].size(); ++i) {
      const double keep = p[k][i];
      p[k][i] = keep + h;
      const double up = ppo_loss(gp.params, gp.batch, hyper, nullptr).loss;
      p[k][i] = keep - h;
      const double down = ppo_loss(gp.params, gp.batch, hyper, nullptr).loss;
      p[k][i] = keep;
      const double numeric = (up - down) / (2 * h);
      const double err = std::abs(numeric - g[k][i]) /
                         std::max(1e-4, std::abs(numeric) + std::abs(g[k][i]));
      worst = std::max(worst, err);
    }
  }
  return worst;
}

}  // namespace testing_support
