#include <doctest.h>

#include <cmath>
#include <numeric>

#include "hearthlab/errors.hpp"
#include "hearthlab/network.hpp"
#include "support.hpp"

using namespace hearth;

TEST_CASE("shapes and parameter count") {
  Rng rng(1);
  const PolicyParams p = init_params(32, 16, 5, rng);
  CHECK(p.feature_dim() == 32);
  CHECK(p.hidden_dim() == 16);
  CHECK(p.num_objects() == 5);
  CHECK(p.parameter_count() ==
        std::size_t(32 * 16 + 16 + 16 * 16 + 16 + 16 * 7 + 7 + 16 * 5 + 5 + 16 + 1));
  const ForwardPass fp = forward(p, std::vector<double>(32, 0.1));
  CHECK(fp.h1.size() == 16);
  CHECK(fp.h2.size() == 16);
  CHECK(fp.prim_logits.size() == 7);
  CHECK(fp.obj_logits.size() == 5);
  CHECK_THROWS_AS(forward(p, std::vector<double>(31, 0.0)), std::invalid_argument);
  CHECK_THROWS_AS(init_params(32, 16, 0, rng), std::invalid_argument);
}

TEST_CASE("zero network gives uniform factored policy") {
  const PolicyParams p = PolicyParams::zeros(8, 4, 4);
  const ForwardPass fp = forward(p, std::vector<double>(8, 1.0));
  CHECK(fp.value == 0.0);
  Rng rng(2);
  const SampledAction a = sample_action(fp.prim_logits, fp.obj_logits, rng);
  CHECK(a.logprob == doctest::Approx(std::log(1.0 / 7) + std::log(1.0 / 4)));
}

TEST_CASE("non-finite outputs raise") {
  PolicyParams p = PolicyParams::zeros(4, 4, 2);
  p.value_head.b[0] = std::nan("");
  CHECK_THROWS_AS(forward(p, std::vector<double>(4, 0.0)), NumericError);
  CHECK_FALSE(p.all_finite());
}

TEST_CASE("orthogonal init") {
  Rng rng(3);
  for (auto [in, out] : {std::pair{12, 5}, std::pair{5, 12}, std::pair{8, 8}}) {
    Dense d(in, out);
    d.b.assign(out, 3.0);
    orthogonal_init(d, 2.0, rng);
    const bool tall = out > in;
    const int n = tall ? in : out;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        double dot = 0.0;
        if (tall) {
          for (int r = 0; r < out; ++r) dot += d.at(r, i) * d.at(r, j);
        } else {
          for (int c = 0; c < in; ++c) dot += d.at(i, c) * d.at(j, c);
        }
        CHECK(dot == doctest::Approx(i == j ? 4.0 : 0.0).epsilon(1e-9).scale(1.0));
      }
    }
    for (double b : d.b) CHECK(b == 0.0);
  }
}

TEST_CASE("same seed, same network") {
  Rng a(9), b(9);
  CHECK(init_params(16, 8, 3, a) == init_params(16, 8, 3, b));
}

TEST_CASE("categorical") {
  const std::vector<double> logits{1.0, 2.0, 0.5, -1.0};
  const Categorical c(logits);
  CHECK(std::accumulate(c.probs.begin(), c.probs.end(), 0.0) ==
        doctest::Approx(1.0).epsilon(1e-15));
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(c.log_probs[i] == doctest::Approx(std::log(c.probs[i])));
  }

  const std::vector<std::uint8_t> mask{1, 0, 1, 0};
  const Categorical m(logits, mask);
  CHECK(m.probs[1] == 0.0);
  CHECK(std::isinf(m.log_probs[3]));
  CHECK(m.probs[0] + m.probs[2] == doctest::Approx(1.0));
  CHECK_THROWS_AS(Categorical(logits, std::vector<std::uint8_t>(4, 0)), NumericError);

  // huge logits stay finite
  const Categorical big(std::vector<double>{1000.0, 0.0});
  CHECK(big.probs[0] == 1.0);
  CHECK(std::isfinite(big.log_probs[1]));

  // one-hot limit
  const Categorical sharp(std::vector<double>{0.0, 60.0, 0.0});
  Rng rng(4);
  for (int i = 0; i < 100; ++i) CHECK(sharp.sample(rng) == 1);
}

TEST_CASE("entropy gradient matches differences") {
  std::vector<double> logits{0.3, -1.2, 0.8, 0.1, 2.0};
  const auto g = Categorical(logits).entropy_grad();
  for (std::size_t i = 0; i < logits.size(); ++i) {
    auto up = logits, down = logits;
    up[i] += 1e-6;
    down[i] -= 1e-6;
    const double num = (Categorical(up).entropy() - Categorical(down).entropy()) / 2e-6;
    CHECK(g[i] == doctest::Approx(num).epsilon(1e-6));
  }
  CHECK(Categorical(std::vector<double>(4, 0.0)).entropy() ==
        doctest::Approx(std::log(4.0)));
}

TEST_CASE("sampling frequencies follow the distribution") {
  const std::vector<double> logits{0.0, 1.0, -0.5, 0.7, 0.2, -2.0, 0.4};
  const Categorical c(logits);
  Rng rng(5);
  const int n = 10000;
  std::vector<int> counts(7, 0);
  for (int i = 0; i < n; ++i) ++counts[c.sample(rng)];
  for (int k = 0; k < 7; ++k) {
    const double p = c.probs[k];
    const double sigma = std::sqrt(n * p * (1 - p));
    CHECK(std::abs(counts[k] - n * p) < 3.0 * sigma + 1.0);
  }
}

TEST_CASE("sample_action reports the joint log-probability") {
  Rng rng(6);
  const std::vector<double> prim{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7};
  const std::vector<double> obj{1.0, -1.0, 0.0};
  for (int i = 0; i < 20; ++i) {
    const SampledAction a = sample_action(prim, obj, rng);
    const double want = Categorical(prim).log_probs[static_cast<int>(a.action.primitive)] +
                        Categorical(obj).log_probs[a.action.object];
    CHECK(a.logprob == want);
  }
}

TEST_CASE("loss gradient matches central differences") {
  Rng rng(7);
  for (bool masks : {false, true}) {
    auto gp = testing_support::random_grad_problem(rng, 16, 8, 3, 6, masks);
    CHECK(testing_support::ppo_gradient_error(gp) < 1e-5);
  }
}

TEST_CASE("featurize separates state and goal namespaces") {
  const auto a = featurize("cup is open", "", 256);
  const auto b = featurize("", "cup is open", 256);
  CHECK(a != b);
  CHECK(featurize("", "", 16) == std::vector<double>(16, 0.0));
}
