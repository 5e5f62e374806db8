#include "hearthlab/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hearthlab/errors.hpp"

namespace hearth {

Advantages compute_gae(std::span<const double> rewards,
                       std::span<const double> values,
                       std::span<const std::uint8_t> dones, double last_value,
                       double gamma, double lambda) {
  const std::size_t n = rewards.size();
  if (values.size() != n || dones.size() != n) {
    throw std::invalid_argument("compute_gae: mismatched rollout lengths");
  }
  Advantages out;
  out.advantages.assign(n, 0.0);
  out.returns.assign(n, 0.0);
  double gae = 0.0;
  for (std::size_t k = n; k-- > 0;) {
    const double live = dones[k] ? 0.0 : 1.0;
    const double next_value = k + 1 == n ? last_value : values[k + 1];
    const double delta = rewards[k] + gamma * next_value * live - values[k];
    gae = delta + gamma * lambda * live * gae;
    out.advantages[k] = gae;
    out.returns[k] = gae + values[k];
  }
  return out;
}

LossStats ppo_loss(const PolicyParams& params,
                   std::span<const LossSample> batch, const PpoHyper& hyper,
                   PolicyParams* grad) {
  LossStats stats;
  if (batch.empty()) return stats;
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  int clipped = 0;

  for (const LossSample& s : batch) {
    const Transition& tr = *s.transition;
    const ForwardPass fp = forward(params, tr.features);
    const Categorical prim(fp.prim_logits, tr.prim_mask);
    const Categorical obj(fp.obj_logits, tr.obj_mask);
    const int a_p = static_cast<int>(tr.action.primitive);
    const int a_o = tr.action.object;

    const double logp = prim.log_probs[a_p] + obj.log_probs[a_o];
    const double ratio = std::exp(logp - tr.logprob);
    const double unclipped = ratio * s.advantage;
    const double clipped_ratio =
        std::clamp(ratio, 1.0 - hyper.clip, 1.0 + hyper.clip);
    const double clipped_term = clipped_ratio * s.advantage;
    const double surrogate = std::min(unclipped, clipped_term);
    if (std::abs(ratio - 1.0) > hyper.clip) ++clipped;

    const double entropy = prim.entropy() + obj.entropy();
    const double verr = fp.value - s.ret;

    stats.surrogate += surrogate * inv_n;
    stats.value_loss += verr * verr * inv_n;
    stats.entropy += entropy * inv_n;

    if (!grad) continue;
    // The unclipped branch is active when it is the minimum (ties included).
    const double d_logp =
        unclipped <= clipped_term ? -unclipped * inv_n : 0.0;
    const double d_entropy = -hyper.entropy_coef * inv_n;

    std::vector<double> d_prim = prim.entropy_grad();
    for (std::size_t j = 0; j < d_prim.size(); ++j) {
      d_prim[j] = d_entropy * d_prim[j] - d_logp * prim.probs[j];
    }
    d_prim[a_p] += d_logp;
    std::vector<double> d_obj = obj.entropy_grad();
    for (std::size_t j = 0; j < d_obj.size(); ++j) {
      d_obj[j] = d_entropy * d_obj[j] - d_logp * obj.probs[j];
    }
    d_obj[a_o] += d_logp;
    const double d_value = hyper.value_coef * 2.0 * verr * inv_n;
    backward(params, tr.features, fp, d_prim, d_obj, d_value, *grad);
  }
  stats.clip_fraction = clipped * inv_n;
  stats.loss = -stats.surrogate + hyper.value_coef * stats.value_loss -
               hyper.entropy_coef * stats.entropy;
  return stats;
}

Adam::Adam(const PolicyParams& shape, double learning_rate, double eps)
    : lr_(learning_rate), eps_(eps), m_(shape.zeros_like()),
      v_(shape.zeros_like()) {}

void Adam::step(PolicyParams& params, const PolicyParams& grad) {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  auto p = params.tensors();
  auto g = grad.tensors();
  auto m = m_.tensors();
  auto v = v_.tensors();
  for (std::size_t k = 0; k < p.size(); ++k) {
    for (std::size_t i = 0; i < p[k].size(); ++i) {
      const double gi = g[k][i];
      m[k][i] = beta1_ * m[k][i] + (1.0 - beta1_) * gi;
      v[k][i] = beta2_ * v[k][i] + (1.0 - beta2_) * gi * gi;
      const double mhat = m[k][i] / bc1;
      const double vhat = v[k][i] / bc2;
      p[k][i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
  }
}

double clip_grad_norm(PolicyParams& grad, double max_norm) {
  double sq = 0.0;
  for (auto t : grad.tensors()) {
    for (double x : t) sq += x * x;
  }
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const double scale = max_norm / (norm + 1e-6);
    for (auto t : grad.tensors()) {
      for (double& x : t) x *= scale;
    }
  }
  return norm;
}

UpdateStats ppo_update(PolicyParams& params, Adam& optimizer,
                       std::span<const Transition> batch,
                       const Advantages& adv, const PpoHyper& hyper,
                       Rng& rng) {
  const std::size_t n = batch.size();
  if (n == 0) throw std::invalid_argument("ppo_update: empty batch");
  if (adv.advantages.size() != n || adv.returns.size() != n) {
    throw std::invalid_argument("ppo_update: advantage/batch size mismatch");
  }

  std::vector<double> a = adv.advantages;
  if (hyper.normalize_advantage && n > 1) {
    const double mean = std::accumulate(a.begin(), a.end(), 0.0) / n;
    double var = 0.0;
    for (double x : a) var += (x - mean) * (x - mean);
    const double sd = std::sqrt(var / (n - 1));
    for (double& x : a) x = (x - mean) / (sd + 1e-8);
  }

  std::vector<LossSample> samples(n);
  for (std::size_t i = 0; i < n; ++i) {
    samples[i] = {&batch[i], a[i], adv.returns[i]};
  }

  UpdateStats stats;
  std::vector<std::size_t> order(n);
  std::vector<LossSample> mb;
  PolicyParams grad = params.zeros_like();
  const std::size_t mb_size =
      static_cast<std::size_t>(std::max(1, hyper.minibatch));
  int index = 0;
  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i) {
      std::swap(order[i - 1], order[rng.below(i)]);
    }
    for (std::size_t start = 0; start < n; start += mb_size, ++index) {
      const std::size_t stop = std::min(n, start + mb_size);
      mb.clear();
      for (std::size_t i = start; i < stop; ++i) {
        mb.push_back(samples[order[i]]);
      }
      for (auto t : grad.tensors()) std::fill(t.begin(), t.end(), 0.0);
      const LossStats ls = ppo_loss(params, mb, hyper, &grad);
      if (!std::isfinite(ls.loss)) {
        throw NumericError("non-finite PPO loss in minibatch " +
                           std::to_string(index));
      }
      clip_grad_norm(grad, hyper.max_grad_norm);
      optimizer.step(params, grad);
      stats.surrogate += ls.surrogate;
      stats.value_loss += ls.value_loss;
      stats.entropy += ls.entropy;
      stats.clip_fraction += ls.clip_fraction;
      ++stats.minibatches;
    }
  }
  if (stats.minibatches > 0) {
    const double k = stats.minibatches;
    stats.surrogate /= k;
    stats.value_loss /= k;
    stats.entropy /= k;
    stats.clip_fraction /= k;
  }
  return stats;
}

}  // namespace hearth
