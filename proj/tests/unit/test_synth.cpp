#include <cmath>

#include <gtest/gtest.h>
#include <json.hpp>

#include "lvlingam/errors.hpp"
#include "lvlingam/rng.hpp"
#include "lvlingam/synth.hpp"
#include "oracles.hpp"

using namespace lvlingam;

namespace {

double beta_cumulant_oracle(double a, double b, int order) {
  // raw moments from Beta functions, cumulants from the partition recursion
  std::vector<double> mu(static_cast<std::size_t>(order) + 1), kappa(mu.size());
  for (int r = 0; r <= order; ++r) mu[r] = std::beta(a + r, b) / std::beta(a, b);
  for (int n = 1; n <= order; ++n) {
    double acc = mu[n];
    for (int m = 1; m < n; ++m) {
      double binom = 1.0;
      for (int t = 1; t <= m - 1; ++t) binom = binom * (n - 1 - t + 1) / t;
      acc -= binom * kappa[m] * mu[n - m];
    }
    kappa[n] = acc;
  }
  return kappa[static_cast<std::size_t>(order)];
}

}  // namespace

TEST(Philox, KnownAnswers) {
  using B = Philox4x32::Block;
  using K = Philox4x32::Key;
  EXPECT_EQ(Philox4x32::generate(B{0, 0, 0, 0}, K{0, 0}),
            (B{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
  EXPECT_EQ(Philox4x32::generate(B{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                 K{0xffffffffu, 0xffffffffu}),
            (B{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
  EXPECT_EQ(Philox4x32::generate(B{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                 K{0xa4093822u, 0x299f31d0u}),
            (B{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(Philox, StreamsAndDiscard) {
  Philox4x32 a(42), b(42), c(42, 1);
  EXPECT_EQ(a(), b());
  Philox4x32 d(42);
  d.discard(6);
  for (int k = 0; k < 5; ++k) a();
  EXPECT_EQ(a(), d());
  Philox4x32 e(42);
  EXPECT_NE(e(), c());
}

TEST(DeriveSeed, DeterministicAndSpread) {
  EXPECT_EQ(derive_seed(1, {2, 3}), derive_seed(1, {2, 3}));
  EXPECT_NE(derive_seed(1, {2, 3}), derive_seed(1, {3, 2}));
  EXPECT_NE(derive_seed(1, {2}), derive_seed(2, {2}));
  EXPECT_NE(splitmix64(0), 0u);
}

TEST(Cumulants, GammaClosedForm) {
  EXPECT_NEAR(gamma_cumulant(0.5, 0.3, 2), 0.5 * 0.09, 1e-15);
  EXPECT_NEAR(gamma_cumulant(0.5, 0.3, 4), 0.5 * std::pow(0.3, 4) * 6, 1e-15);
  EXPECT_NEAR(gamma_cumulant(2.0, 1.0, 6), 2.0 * 120, 1e-12);
}

TEST(Cumulants, BetaMatchesMomentOracle) {
  for (double a : {1.5, 1.8, 2.0}) {
    for (double b : {2.0, 5.0, 10.0}) {
      for (int k = 1; k <= 6; ++k) {
        const double want = beta_cumulant_oracle(a, b, k);
        EXPECT_NEAR(beta_cumulant(a, b, k), want, 1e-10 * (1e-3 + std::abs(want))) << a << " " << b << " " << k;
      }
    }
  }
  EXPECT_NEAR(beta_cumulant(2, 3, 2), 2.0 * 3 / (25.0 * 6), 1e-15);
}

TEST(Model, MixingMatrixMatchesPathSums) {
  for (const auto& name : preset_names()) {
    const Dag g = preset(name).dag;
    const WeightedModel m = draw_model(g, NoiseFamily::kGamma, 7);
    const Eigen::MatrixXd want = oracle::mixing_by_paths(g, m.a);
    EXPECT_LT((m.bprime - want).cwiseAbs().maxCoeff(), 1e-12) << name;
  }
}

TEST(Model, DrawRangesAndDeterminism) {
  const Dag g = preset("IV_3T_2I").dag;
  const WeightedModel m = draw_model(g, NoiseFamily::kGamma, 99);
  for (const Edge& e : g.edges()) {
    const double w = std::abs(m.a(static_cast<Eigen::Index>(e.to), static_cast<Eigen::Index>(e.from)));
    EXPECT_GE(w, 0.5);
    EXPECT_LE(w, 0.9);
  }
  for (const auto& np : m.noise.params) {
    EXPECT_GE(np.first, 0.1);
    EXPECT_LE(np.first, 1.0);
    EXPECT_GE(np.second, 0.1);
    EXPECT_LE(np.second, 0.5);
  }
  const WeightedModel beta = draw_model(g, NoiseFamily::kBeta, 99);
  for (const auto& np : beta.noise.params) {
    EXPECT_GE(np.first, 1.5);
    EXPECT_LE(np.first, 2.0);
    EXPECT_GE(np.second, 2.0);
    EXPECT_LE(np.second, 10.0);
  }
  EXPECT_EQ(draw_model(g, NoiseFamily::kGamma, 99).a, m.a);
  EXPECT_NE(draw_model(g, NoiseFamily::kGamma, 100).a, m.a);
  EXPECT_THROW(draw_model(Dag(3, {{2, 0}}, {0, 1}, {2}), NoiseFamily::kGamma, 1), Error);
}

TEST(Model, LatentScaleConvention) {
  const Dag g = preset("IV_3T_2I").dag;
  const WeightedModel m = draw_model(g, NoiseFamily::kGamma, 5);
  const Eigen::MatrixXd b = m.scaled_bprime();
  for (NodeId l : g.latent()) {
    const auto col = static_cast<Eigen::Index>(g.column_index(l));
    for (NodeId v : g.topological_order()) {
      if (!g.is_observed(v)) continue;
      const double entry = b(static_cast<Eigen::Index>(g.observed_index(v)), col);
      if (entry != 0.0) {
        EXPECT_NEAR(entry, 1.0, 1e-15);
        break;
      }
    }
  }
  // population cumulants do not depend on the scaling
  const auto raw = make_population_source(m.bprime, population_noise_cumulants(m, 4));
  const auto scaled = make_population_source(b, m.scaled_noise_cumulants(4));
  EXPECT_NEAR(raw->cumulant({4, 7, 7, 0}), scaled->cumulant({4, 7, 7, 0}), 1e-14);
}

TEST(Model, TrueEffectsAndJson) {
  const PresetInfo info = preset("G3");
  const WeightedModel m = draw_model(info.dag, NoiseFamily::kGamma, 3);
  EXPECT_DOUBLE_EQ(m.total_effect(0, 2), m.a(1, 0) * m.a(2, 1));
  EXPECT_EQ(m.true_effects().at({1, 2}), m.total_effect(1, 2));
  const auto doc = nlohmann::json::parse(m.to_json());
  EXPECT_EQ(doc["noise"]["family"], "gamma");
  EXPECT_EQ(doc["weights"].size(), info.dag.edges().size());
  EXPECT_FALSE(doc["true_effects"].empty());
}

TEST(Sampling, DeterministicCenteredAndDegenerate) {
  const WeightedModel m = draw_model(preset("G1").dag, NoiseFamily::kGamma, 2);
  const Eigen::MatrixXd x = sample_matrix(m, 2000, 4);
  EXPECT_EQ(x, sample_matrix(m, 2000, 4));
  EXPECT_NE(x, sample_matrix(m, 2000, 5));
  // a longer draw extends the shorter one column by column
  EXPECT_EQ(sample_matrix(m, 10, 4), x.topRows(10));
  EXPECT_LT(x.colwise().mean().cwiseAbs().maxCoeff(), 0.05);
  EXPECT_THROW(sample_data(m, 1, 4), Error);
  EXPECT_THROW(sample_matrix(m, 0, 4), Error);

  const WeightedModel z = make_model(m.dag, m.a, NoiseSpec{NoiseFamily::kDegenerate, m.noise.params});
  const Eigen::MatrixXd one = sample_matrix(z, 1, 1);
  ASSERT_EQ(one.rows(), 1);
  EXPECT_TRUE(one.isZero(0.0));
  EXPECT_THROW(population_noise_cumulants(z, 4), Error);
}

TEST(Sampling, ConvergesToPopulationCumulants) {
  const WeightedModel m = draw_model(preset("G1").dag, NoiseFamily::kGamma, 12);
  const auto pop = make_population_source(m.bprime, population_noise_cumulants(m, 4));
  const auto est = make_sample_source(sample_data(m, 1000000, 3));
  for (const auto& idx : std::vector<std::vector<std::size_t>>{{1, 1}, {0, 2}, {1, 1, 2}, {2, 2, 2}, {1, 2, 2, 2}}) {
    const double want = pop->cumulant(idx);
    // error on the standardized scale: divide by the product of marginal sds
    double scale = 1.0;
    for (std::size_t v : idx) scale *= std::sqrt(pop->cumulant({v, v}));
    EXPECT_LT(std::abs(est->cumulant(idx) - want), 0.05 * scale) << idx.size();
  }
}
