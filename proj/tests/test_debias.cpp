#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "debias.hpp"
#include "errors.hpp"
#include "helpers.hpp"

using namespace vqalab;

TEST_CASE("cosine similarity closed forms") {
  std::vector<double> x = {1.0, 2.0, -3.0};
  CHECK(cosine_sim(x, x) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(cosine_sim({1.0, 0.0}, {0.0, 5.0}) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(cosine_sim({1.0, 1.0}, {-2.0, -2.0}) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK_THROWS_AS(cosine_sim({0.0, 0.0}, {1.0, 1.0}), SimError);
  CHECK_THROWS_AS(cosine_sim({1.0}, {1.0, 2.0}), SimError);
}

TEST_CASE("cosine similarity matches an independent recomputation") {
  Rng rng(3);
  for (int it = 0; it < 100; ++it) {
    std::vector<double> a(6), b(6);
    for (double& v : a) v = rng.uniform(-2.0, 2.0);
    for (double& v : b) v = rng.uniform(-2.0, 2.0);
    double dot = 0, na = 0, nb = 0;
    for (size_t i = 0; i < a.size(); ++i) {
      dot += a[i] * b[i];
      na += a[i] * a[i];
      nb += b[i] * b[i];
    }
    double expected = dot / (std::sqrt(na) * std::sqrt(nb));
    CHECK(cosine_sim(a, b) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(cosine_sim(a, b) >= -1.0);
    CHECK(cosine_sim(a, b) <= 1.0);
  }
}

TEST_CASE("contrastive loss closed-form anchors") {
  // Positive identical to the anchor, one orthogonal negative:
  // -log(e / (e + 1)).
  std::vector<std::vector<double>> anchors = {{1.0, 0.0}, {0.0, 1.0}};
  std::vector<std::vector<double>> positives = {{1.0, 0.0}, {0.0, 1.0}};
  double expected_term = -std::log(std::exp(1.0) / (std::exp(1.0) + 1.0));
  CHECK(expected_term == doctest::Approx(0.3133).epsilon(1e-3));  // frozen value
  auto res = contrastive_loss(anchors, positives);
  CHECK(res.loss == doctest::Approx(expected_term).epsilon(1e-12));

  // pos == anchor == every negative: each term is -log(1/N).
  std::vector<std::vector<double>> same = {{1.0, 2.0}, {1.0, 2.0}, {1.0, 2.0}};
  auto res_same = contrastive_loss(same, same);
  CHECK(res_same.loss == doctest::Approx(std::log(3.0)).epsilon(1e-12));
}

TEST_CASE("contrastive loss validates its batch") {
  std::vector<std::vector<double>> one = {{1.0, 0.0}};
  CHECK_THROWS_AS(contrastive_loss(one, one), BatchError);
  std::vector<std::vector<double>> two = {{1.0, 0.0}, {0.0, 1.0}};
  std::vector<std::vector<double>> wrong = {{1.0, 0.0}};
  CHECK_THROWS_AS(contrastive_loss(two, wrong), BatchError);
  std::vector<std::vector<double>> zero = {{0.0, 0.0}, {0.0, 1.0}};
  CHECK_THROWS_AS(contrastive_loss(zero, two), SimError);
  CHECK(contrastive_loss(two, two).loss >= 0.0);
}

TEST_CASE("contrastive loss is invariant to positive rescaling of a feature") {
  Rng rng(9);
  std::vector<std::vector<double>> anchors(4, std::vector<double>(5));
  std::vector<std::vector<double>> positives(4, std::vector<double>(5));
  for (auto& v : anchors)
    for (double& x : v) x = rng.uniform(-1.0, 1.0);
  for (auto& v : positives)
    for (double& x : v) x = rng.uniform(-1.0, 1.0);
  double base = contrastive_loss(anchors, positives).loss;

  auto scaled = anchors;
  for (double& x : scaled[2]) x *= 7.5;
  CHECK(contrastive_loss(scaled, positives).loss == doctest::Approx(base).epsilon(1e-10));

  auto scaled_pos = positives;
  for (double& x : scaled_pos[1]) x *= 0.02;
  CHECK(contrastive_loss(anchors, scaled_pos).loss == doctest::Approx(base).epsilon(1e-10));
}

TEST_CASE("loss falls when an anchor moves toward its positive") {
  std::vector<std::vector<double>> anchors = {{1.0, 0.2}, {-0.5, 1.0}, {0.3, -0.8}};
  std::vector<std::vector<double>> positives = {{0.2, 1.0}, {1.0, 0.1}, {-0.6, 0.4}};
  double before = contrastive_loss(anchors, positives).loss;
  // Nudge anchor 0 toward its positive, negatives untouched.
  for (size_t j = 0; j < anchors[0].size(); ++j)
    anchors[0][j] = 0.5 * anchors[0][j] + 0.5 * positives[0][j];
  double after = contrastive_loss(anchors, positives).loss;
  CHECK(after < before);
}

TEST_CASE("contrastive gradients match finite differences") {
  Rng rng(21);
  std::vector<std::vector<double>> anchors(4, std::vector<double>(5));
  std::vector<std::vector<double>> positives(4, std::vector<double>(5));
  for (auto& v : anchors)
    for (double& x : v) x = rng.uniform(-1.0, 1.0);
  for (auto& v : positives)
    for (double& x : v) x = rng.uniform(-1.0, 1.0);

  auto res = contrastive_loss(anchors, positives);
  const double eps = 1e-5;
  for (auto* side : {&anchors, &positives}) {
    bool is_anchor = side == &anchors;
    for (size_t i = 0; i < side->size(); ++i) {
      for (size_t j = 0; j < (*side)[i].size(); ++j) {
        double saved = (*side)[i][j];
        (*side)[i][j] = saved + eps;
        double lp = contrastive_loss(anchors, positives).loss;
        (*side)[i][j] = saved - eps;
        double lm = contrastive_loss(anchors, positives).loss;
        (*side)[i][j] = saved;
        double fd = (lp - lm) / (2.0 * eps);
        double analytic = is_anchor ? res.d_anchors[i][j] : res.d_positives[i][j];
        CHECK(analytic ==
              doctest::Approx(fd).epsilon(1e-3).scale(std::max(1e-6, std::abs(fd))));
      }
    }
  }
}

TEST_CASE("joint loss composes linearly") {
  CHECK(joint_loss(1.0, 0.3, 0.0) == doctest::Approx(1.0));
  CHECK(joint_loss(1.0, 0.3, 1.0) == doctest::Approx(1.3));
  CHECK(joint_loss(0.0, 0.4, 2.0) - joint_loss(0.0, 0.4, 1.0) ==
        doctest::Approx(0.4));  // doubling lambda doubles the contrastive share
  CHECK_THROWS_AS(joint_loss(1.0, 1.0, -0.1), InvalidArgumentError);
}

TEST_CASE("mix_features blends and validates") {
  std::vector<double> orig = {2.0, 0.0};
  std::vector<double> variant = {0.0, 2.0};
  CHECK(mix_features(orig, variant, 1.0) == orig);
  CHECK(mix_features(orig, variant, 0.0) == variant);
  CHECK(mix_features(orig, variant, 0.5) == std::vector<double>{1.0, 1.0});
  CHECK_THROWS_AS(mix_features(orig, {1.0}, 0.5), ModelError);
  CHECK_THROWS_AS(mix_features(orig, variant, 1.5), InvalidArgumentError);
}

TEST_CASE("mix_features is linear in both encodings") {
  Rng rng(5);
  for (int it = 0; it < 50; ++it) {
    std::vector<double> a(4), b(4), c(4);
    for (double& x : a) x = rng.uniform(-1.0, 1.0);
    for (double& x : b) x = rng.uniform(-1.0, 1.0);
    for (double& x : c) x = rng.uniform(-1.0, 1.0);
    double alpha = rng.next_double();
    auto ab = mix_features(a, b, alpha);
    // mix(a + c, b, alpha) == mix(a, b, alpha) + alpha * c
    std::vector<double> ac(4);
    for (size_t j = 0; j < 4; ++j) ac[j] = a[j] + c[j];
    auto mixed = mix_features(ac, b, alpha);
    for (size_t j = 0; j < 4; ++j)
      CHECK(mixed[j] == doctest::Approx(ab[j] + alpha * c[j]).epsilon(1e-12));
  }
}
