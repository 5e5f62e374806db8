#include "hearthlab/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hearthlab/embed.hpp"
#include "hearthlab/errors.hpp"

namespace hearth {

FeatureVector featurize(const std::string& state_text,
                        const std::string& goal_text, int dim) {
  HashedFeatures features(dim);
  features.add_tokens(tokenize(state_text), "s:");
  features.add_tokens(tokenize(goal_text), "g:");
  return features.normalized();
}

std::vector<std::span<double>> PolicyParams::tensors() {
  std::vector<std::span<double>> out;
  for (Dense* d : {&trunk1, &trunk2, &prim_head, &obj_head, &value_head}) {
    out.emplace_back(d->w);
    out.emplace_back(d->b);
  }
  return out;
}

std::vector<std::span<const double>> PolicyParams::tensors() const {
  std::vector<std::span<const double>> out;
  for (const Dense* d :
       {&trunk1, &trunk2, &prim_head, &obj_head, &value_head}) {
    out.emplace_back(d->w);
    out.emplace_back(d->b);
  }
  return out;
}

std::size_t PolicyParams::parameter_count() const {
  std::size_t n = 0;
  for (auto t : tensors()) n += t.size();
  return n;
}

bool PolicyParams::all_finite() const {
  for (auto t : tensors()) {
    for (double v : t) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

PolicyParams PolicyParams::zeros(int feature_dim, int hidden_dim,
                                 int num_objects) {
  PolicyParams p;
  p.trunk1 = Dense(feature_dim, hidden_dim);
  p.trunk2 = Dense(hidden_dim, hidden_dim);
  p.prim_head = Dense(hidden_dim, kNumPrimitives);
  p.obj_head = Dense(hidden_dim, num_objects);
  p.value_head = Dense(hidden_dim, 1);
  return p;
}

PolicyParams PolicyParams::zeros_like() const {
  return zeros(feature_dim(), hidden_dim(), num_objects());
}

void orthogonal_init(Dense& layer, double gain, Rng& rng) {
  // Gram-Schmidt over the shorter side of a Gaussian matrix.
  const bool tall = layer.out > layer.in;
  const int rows = tall ? layer.in : layer.out;
  const int cols = tall ? layer.out : layer.in;
  std::vector<double> m(std::size_t(rows) * cols);
  for (double& v : m) v = rng.normal();
  for (int r = 0; r < rows; ++r) {
    double* row = &m[std::size_t(r) * cols];
    for (int pass = 0; pass < 2; ++pass) {
      for (int q = 0; q < r; ++q) {
        const double* prev = &m[std::size_t(q) * cols];
        double dot = 0.0;
        for (int c = 0; c < cols; ++c) dot += row[c] * prev[c];
        for (int c = 0; c < cols; ++c) row[c] -= dot * prev[c];
      }
    }
    double norm = 0.0;
    for (int c = 0; c < cols; ++c) norm += row[c] * row[c];
    norm = std::sqrt(norm);
    for (int c = 0; c < cols; ++c) row[c] /= norm;
  }
  for (int r = 0; r < layer.out; ++r) {
    for (int c = 0; c < layer.in; ++c) {
      const double v = tall ? m[std::size_t(c) * cols + r]
                            : m[std::size_t(r) * cols + c];
      layer.at(r, c) = gain * v;
    }
  }
  std::fill(layer.b.begin(), layer.b.end(), 0.0);
}

PolicyParams init_params(int feature_dim, int hidden_dim, int num_objects,
                         Rng& rng, double head_gain) {
  if (num_objects < 1) throw std::invalid_argument("num_objects must be >= 1");
  PolicyParams p = PolicyParams::zeros(feature_dim, hidden_dim, num_objects);
  orthogonal_init(p.trunk1, 1.0, rng);
  orthogonal_init(p.trunk2, 1.0, rng);
  orthogonal_init(p.prim_head, head_gain, rng);
  orthogonal_init(p.obj_head, head_gain, rng);
  orthogonal_init(p.value_head, head_gain, rng);
  return p;
}

void init_actor_heads(PolicyParams& params, int num_objects, Rng& rng,
                      bool keep_primitive_head, double head_gain) {
  if (num_objects < 1) throw std::invalid_argument("num_objects must be >= 1");
  const int hidden = params.hidden_dim();
  // Draw order matches init_params: primitive head, then object head.
  Dense prim(hidden, kNumPrimitives);
  orthogonal_init(prim, head_gain, rng);
  if (!keep_primitive_head) params.prim_head = std::move(prim);
  params.obj_head = Dense(hidden, num_objects);
  orthogonal_init(params.obj_head, head_gain, rng);
}

namespace {

void dense_forward(const Dense& layer, std::span<const double> x,
                   std::vector<double>& out) {
  out.assign(layer.b.begin(), layer.b.end());
  for (int r = 0; r < layer.out; ++r) {
    const double* row = &layer.w[std::size_t(r) * layer.in];
    double acc = 0.0;
    for (int c = 0; c < layer.in; ++c) acc += row[c] * x[c];
    out[r] += acc;
  }
}

void require_finite(std::span<const double> v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) {
      throw NumericError(std::string("non-finite ") + what +
                         " in policy forward pass");
    }
  }
}

}  // namespace

ForwardPass forward(const PolicyParams& params, std::span<const double> x) {
  if (static_cast<int>(x.size()) != params.feature_dim()) {
    throw std::invalid_argument("feature dimension " +
                                std::to_string(x.size()) +
                                " does not match network input " +
                                std::to_string(params.feature_dim()));
  }
  ForwardPass fp;
  // Hashed features are sparse: visit only nonzero inputs.
  const Dense& t1 = params.trunk1;
  fp.h1.assign(t1.b.begin(), t1.b.end());
  for (int c = 0; c < t1.in; ++c) {
    if (x[c] == 0.0) continue;
    const double xc = x[c];
    for (int r = 0; r < t1.out; ++r) fp.h1[r] += t1.at(r, c) * xc;
  }
  for (double& v : fp.h1) v = std::tanh(v);

  dense_forward(params.trunk2, fp.h1, fp.h2);
  for (double& v : fp.h2) v = std::tanh(v);

  dense_forward(params.prim_head, fp.h2, fp.prim_logits);
  dense_forward(params.obj_head, fp.h2, fp.obj_logits);
  std::vector<double> value;
  dense_forward(params.value_head, fp.h2, value);
  fp.value = value[0];

  require_finite(fp.prim_logits, "primitive logits");
  require_finite(fp.obj_logits, "object logits");
  require_finite({&fp.value, 1}, "value");
  return fp;
}

namespace {

// Adds d_out * input^T to the weight gradient and d_out to the bias gradient,
// and accumulates W^T d_out into d_in when given.
void dense_backward(const Dense& layer, std::span<const double> input,
                    std::span<const double> d_out, Dense& grad,
                    std::vector<double>* d_in) {
  for (int r = 0; r < layer.out; ++r) {
    const double g = d_out[r];
    if (g == 0.0) continue;
    grad.b[r] += g;
    double* grow = &grad.w[std::size_t(r) * layer.in];
    const double* wrow = &layer.w[std::size_t(r) * layer.in];
    for (int c = 0; c < layer.in; ++c) grow[c] += g * input[c];
    if (d_in) {
      for (int c = 0; c < layer.in; ++c) (*d_in)[c] += g * wrow[c];
    }
  }
}

}  // namespace

void backward(const PolicyParams& params, std::span<const double> x,
              const ForwardPass& fp, std::span<const double> d_prim,
              std::span<const double> d_obj, double d_value,
              PolicyParams& grad) {
  const int hidden = params.hidden_dim();
  std::vector<double> d_h2(hidden, 0.0);
  dense_backward(params.prim_head, fp.h2, d_prim, grad.prim_head, &d_h2);
  dense_backward(params.obj_head, fp.h2, d_obj, grad.obj_head, &d_h2);
  dense_backward(params.value_head, fp.h2, {&d_value, 1}, grad.value_head,
                 &d_h2);

  std::vector<double> d_z2(hidden);
  for (int i = 0; i < hidden; ++i) {
    d_z2[i] = d_h2[i] * (1.0 - fp.h2[i] * fp.h2[i]);
  }
  std::vector<double> d_h1(hidden, 0.0);
  dense_backward(params.trunk2, fp.h1, d_z2, grad.trunk2, &d_h1);

  std::vector<double> d_z1(hidden);
  for (int i = 0; i < hidden; ++i) {
    d_z1[i] = d_h1[i] * (1.0 - fp.h1[i] * fp.h1[i]);
  }
  Dense& g1 = grad.trunk1;
  for (int i = 0; i < hidden; ++i) g1.b[i] += d_z1[i];
  for (int c = 0; c < params.feature_dim(); ++c) {
    if (x[c] == 0.0) continue;
    for (int i = 0; i < hidden; ++i) g1.at(i, c) += d_z1[i] * x[c];
  }
}

Categorical::Categorical(std::span<const double> logits,
                         std::span<const std::uint8_t> mask) {
  const std::size_t n = logits.size();
  auto allowed = [&](std::size_t i) { return mask.empty() || mask[i] != 0; };
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    if (allowed(i)) mx = std::max(mx, logits[i]);
  }
  if (!std::isfinite(mx)) {
    throw NumericError("categorical distribution has no allowed outcome");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (allowed(i)) sum += std::exp(logits[i] - mx);
  }
  const double log_z = mx + std::log(sum);
  probs.assign(n, 0.0);
  log_probs.assign(n, -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < n; ++i) {
    if (!allowed(i)) continue;
    log_probs[i] = logits[i] - log_z;
    probs[i] = std::exp(log_probs[i]);
  }
}

double Categorical::entropy() const {
  double h = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] > 0.0) h -= probs[i] * log_probs[i];
  }
  return h;
}

std::vector<double> Categorical::entropy_grad() const {
  const double h = entropy();
  std::vector<double> g(probs.size(), 0.0);
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] > 0.0) g[i] = -probs[i] * (log_probs[i] + h);
  }
  return g;
}

int Categorical::sample(Rng& rng) const {
  const double u = rng.uniform();
  double acc = 0.0;
  int last = -1;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    acc += probs[i];
    last = static_cast<int>(i);
    if (u < acc) return last;
  }
  return last;
}

SampledAction sample_action(std::span<const double> prim_logits,
                            std::span<const double> obj_logits, Rng& rng) {
  const Categorical prim(prim_logits);
  const Categorical obj(obj_logits);
  SampledAction out;
  const int p = prim.sample(rng);
  const int o = obj.sample(rng);
  out.action = {static_cast<Primitive>(p), o};
  out.logprob = prim.log_probs[p] + obj.log_probs[o];
  return out;
}

}  // namespace hearth
