#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hearthlab/rng.hpp"
#include "hearthlab/world.hpp"

namespace hearth {

using FeatureVector = std::vector<double>;

// Hashed uni+bigram features of the state text ("s:" namespace) and goal
// text ("g:" namespace), L2-normalized.
FeatureVector featurize(const std::string& state_text,
                        const std::string& goal_text, int dim);

// Fully connected layer, weights row-major (out x in).
struct Dense {
  int in = 0;
  int out = 0;
  std::vector<double> w;
  std::vector<double> b;

  Dense() = default;
  Dense(int in_dim, int out_dim)
      : in(in_dim), out(out_dim), w(std::size_t(in_dim) * out_dim, 0.0),
        b(out_dim, 0.0) {}
  double& at(int row, int col) { return w[std::size_t(row) * in + col]; }
  double at(int row, int col) const { return w[std::size_t(row) * in + col]; }
  bool operator==(const Dense&) const = default;
};

// Shared tanh trunk F -> H -> H with three linear heads: primitive logits
// (7), object logits (K) and state value (1).
struct PolicyParams {
  Dense trunk1;
  Dense trunk2;
  Dense prim_head;
  Dense obj_head;
  Dense value_head;

  int feature_dim() const { return trunk1.in; }
  int hidden_dim() const { return trunk1.out; }
  int num_objects() const { return obj_head.out; }

  // Weight and bias buffers in a fixed order (trunk1.w, trunk1.b, ...).
  std::vector<std::span<double>> tensors();
  std::vector<std::span<const double>> tensors() const;
  std::size_t parameter_count() const;
  bool all_finite() const;
  bool operator==(const PolicyParams&) const = default;

  static PolicyParams zeros(int feature_dim, int hidden_dim, int num_objects);
  PolicyParams zeros_like() const;
};

// Orthogonal rows (or columns, for tall matrices) scaled by `gain`, zero bias.
void orthogonal_init(Dense& layer, double gain, Rng& rng);

PolicyParams init_params(int feature_dim, int hidden_dim, int num_objects,
                         Rng& rng, double head_gain = 0.01);
// Fresh actor heads, same initializer as init_params.
void init_actor_heads(PolicyParams& params, int num_objects, Rng& rng,
                      bool keep_primitive_head = false,
                      double head_gain = 0.01);

struct ForwardPass {
  std::vector<double> h1;
  std::vector<double> h2;
  std::vector<double> prim_logits;
  std::vector<double> obj_logits;
  double value = 0.0;
};

// Throws NumericError on non-finite outputs.
ForwardPass forward(const PolicyParams& params, std::span<const double> x);

// Accumulates parameter gradients into `grad` given loss gradients with
// respect to the three head outputs.
void backward(const PolicyParams& params, std::span<const double> x,
              const ForwardPass& fp, std::span<const double> d_prim,
              std::span<const double> d_obj, double d_value,
              PolicyParams& grad);

// Softmax restricted to entries with mask[i] != 0 (empty mask: all allowed).
// Masked-out entries get probability 0 and log-probability -inf.
struct Categorical {
  std::vector<double> probs;
  std::vector<double> log_probs;

  Categorical(std::span<const double> logits,
              std::span<const std::uint8_t> mask = {});
  double entropy() const;
  // d entropy / d logits.
  std::vector<double> entropy_grad() const;
  int sample(Rng& rng) const;
};

struct SampledAction {
  Action action;
  double logprob = 0.0;
};

SampledAction sample_action(std::span<const double> prim_logits,
                            std::span<const double> obj_logits, Rng& rng);

}  // namespace hearth
