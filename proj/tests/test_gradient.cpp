#include <doctest.h>

#include <random>

#include "atise/loss.hpp"
#include "atise/trainer.hpp"
#include "support.hpp"

using namespace atise;

namespace {

constexpr Variant kVariants[] = {Variant::kFull, Variant::kSN, Variant::kTN, Variant::kTS};

ModelConfig config_for(Variant variant, std::int32_t d) {
  ModelConfig c;
  c.d = d;
  c.variant = variant;
  c.n_entities = 6;
  c.n_relations = 3;
  c.n_steps = 9;
  return c;
}

Quadruple random_quad(const ModelConfig& c, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::int32_t> e(0, c.n_entities - 1), r(0, c.n_relations - 1), t(0, c.n_steps - 1);
  return {e(rng), r(rng), e(rng), t(rng)};
}

}  // namespace

TEST_SUITE("gradient") {
  TEST_CASE("score gradients match finite differences") {
    std::mt19937_64 rng(101);
    for (const Variant variant : kVariants) {
      for (const std::int32_t d : {2, 8}) {
        const ModelConfig c = config_for(variant, d);
        for (int trial = 0; trial < 10; ++trial) {
          const ModelParams p = testing::random_params(c, rng);
          const Quadruple q = random_quad(c, rng);
          const double err =
              testing::gradient_check(p, grad_score(p, q), [&](const ModelParams& x) { return score(x, q); });
          CHECK_MESSAGE(err <= 1e-4, variant_name(variant), " d=", d);
        }
      }
    }
  }

  TEST_CASE("each KL direction has its own gradient") {
    std::mt19937_64 rng(111);
    const ModelConfig c = config_for(Variant::kFull, 4);
    for (int trial = 0; trial < 10; ++trial) {
      const ModelParams p = testing::random_params(c, rng);
      const Quadruple q = random_quad(c, rng);
      const double forward = testing::gradient_check(p, grad_kl(p, q, KlDirection::kEntityToRelation),
                                                     [&](const ModelParams& x) { return kl_score(x, q); });
      CHECK(forward <= 1e-4);
      const double backward =
          testing::gradient_check(p, grad_kl(p, q, KlDirection::kRelationToEntity), [&](const ModelParams& x) {
            const GaussianEmbed pe = entity_transform_at(x, q);
            const GaussianEmbed pr = relation_embed_at(x, q);
            return kl_divergence(pr, pe);
          });
      CHECK(backward <= 1e-4);
    }
  }

  TEST_CASE("records only hold the variant's families for touched rows") {
    std::mt19937_64 rng(121);
    const ModelConfig c = config_for(Variant::kSN, 3);
    const ModelParams p = testing::random_params(c, rng);
    const GradRecord g = grad_score(p, {1, 2, 4, 3});
    CHECK(g.entities.size() == 2);
    CHECK(g.relations.size() == 1);
    CHECK_FALSE(g.value(Table::kEntity, 1, Family::kTrendRate, 0));
    CHECK_FALSE(g.value(Table::kEntity, 1, Family::kTrendDirection, 0));
    CHECK(g.value(Table::kEntity, 1, Family::kAmplitude, 0));
    CHECK_FALSE(g.value(Table::kEntity, 0, Family::kBase, 0));

    const GradRecord ts = grad_score(testing::random_params(config_for(Variant::kTS, 3), rng), {1, 2, 4, 3});
    CHECK_FALSE(ts.value(Table::kRelation, 2, Family::kVariance, 0));
  }

  TEST_CASE("batch loss gradients match finite differences") {
    std::mt19937_64 rng(131);
    for (const Variant variant : kVariants) {
      const ModelConfig c = config_for(variant, 4);
      for (int trial = 0; trial < 5; ++trial) {
        const ModelParams p = testing::random_params(c, rng);
        std::vector<Quadruple> positives = {random_quad(c, rng), random_quad(c, rng)};
        const auto negatives = sample_negatives(positives, 3, c.n_entities, rng);
        for (const double adv_temp : {0.0, 0.7}) {
          const BatchLoss result = batch_loss(p, positives, negatives, 2.0, adv_temp);
          CHECK(result.loss == doctest::Approx(testing::frozen_weight_loss(p, p, positives, negatives, 2.0, adv_temp))
                                   .epsilon(1e-12));
          const double err = testing::gradient_check(p, result.grad, [&](const ModelParams& x) {
            return testing::frozen_weight_loss(x, p, positives, negatives, 2.0, adv_temp);
          });
          CHECK_MESSAGE(err <= 1e-4, variant_name(variant), " adv_temp=", adv_temp);
          if (adv_temp == 0.0) {
            // Uniform weights do not depend on the parameters at all.
            const double full = testing::gradient_check(p, result.grad, [&](const ModelParams& x) {
              return batch_loss(x, positives, negatives, 2.0, 0.0).loss;
            });
            CHECK(full <= 1e-4);
          }
        }
      }
    }
  }

  TEST_CASE("loss helpers are stable") {
    CHECK(neg_log_sigmoid(0.0) == doctest::Approx(std::log(2.0)));
    CHECK(neg_log_sigmoid(-800.0) == doctest::Approx(800.0));
    CHECK(neg_log_sigmoid(800.0) == 0.0);
    CHECK(sigmoid(-800.0) == 0.0);
    const std::vector<double> scores = {1.0, 2.0, 1e6};
    const auto w = adversarial_weights(scores, 1.0);
    CHECK(w[0] + w[1] + w[2] == doctest::Approx(1.0));
    CHECK(w[0] > w[1]);
    CHECK(w[2] == 0.0);
  }
}
