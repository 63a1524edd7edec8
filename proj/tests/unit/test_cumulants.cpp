#include <random>

#include <gtest/gtest.h>

#include "lvlingam/cumulants.hpp"
#include "lvlingam/errors.hpp"
#include "lvlingam/multiset.hpp"
#include "oracles.hpp"

using namespace lvlingam;

namespace {

Eigen::MatrixXd skewed_data(std::size_t n, std::size_t p, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::gamma_distribution<double> g(0.7, 1.0);
  Eigen::MatrixXd e(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  for (Eigen::Index r = 0; r < e.rows(); ++r) {
    for (Eigen::Index c = 0; c < e.cols(); ++c) e(r, c) = g(rng);
  }
  Eigen::MatrixXd mix = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
  for (Eigen::Index c = 1; c < mix.cols(); ++c) mix(c - 1, c) = 0.6;
  return e * mix + Eigen::MatrixXd::Constant(e.rows(), e.cols(), 3.0);
}

double rel_diff(double a, double b) { return std::abs(a - b) / std::max(1e-12, std::abs(b)); }

}  // namespace

TEST(Sample, Validation) {
  EXPECT_THROW(Sample(Eigen::MatrixXd::Zero(1, 2)), Error);
  Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(3, 2);
  bad(1, 1) = std::nan("");
  EXPECT_THROW(Sample{bad}, Error);
  EXPECT_THROW(Sample(Eigen::MatrixXd::Zero(3, 2), {"a"}), Error);
}

TEST(SampleCumulants, MatchPowerSumOracleAllOrders) {
  const Eigen::MatrixXd data = skewed_data(40, 3, 1);
  const Sample s(data);
  const SampleCumulants src(s);
  for (std::size_t k = 2; k <= 6; ++k) {
    for (const auto& key : multisets(3, k)) {
      const double got = src.cumulant(key);
      const double want = oracle::sample_cumulant(data, key);
      EXPECT_LT(rel_diff(got, want), 1e-8) << "order " << k << " key[0]=" << key[0];
      EXPECT_DOUBLE_EQ(sample_cumulant(s, key), got);
    }
  }
}

TEST(SampleCumulants, PermutationAndShiftInvariant) {
  const Eigen::MatrixXd data = skewed_data(30, 3, 2);
  const SampleCumulants a(data);
  const SampleCumulants b(Eigen::MatrixXd(data.array() + 100.0));
  EXPECT_DOUBLE_EQ(a.cumulant({0, 1, 2, 1}), a.cumulant({1, 1, 0, 2}));
  EXPECT_NEAR(a.cumulant({0, 1, 1}), b.cumulant({0, 1, 1}), 1e-9);
}

TEST(SampleCumulants, RejectsTooFewRows) {
  const SampleCumulants src(Eigen::MatrixXd(skewed_data(3, 2, 3)));
  EXPECT_NO_THROW(src.cumulant({0, 1, 1}));
  try {
    src.cumulant({0, 0, 1, 1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInsufficientSample);
  }
  EXPECT_THROW(src.cumulant({0, 0, 0, 0, 0, 0, 0}), Error);
  EXPECT_THROW(src.cumulant({0, 5}), Error);
}

TEST(SampleCumulants, LinearMapIsExact) {
  const Eigen::MatrixXd data = skewed_data(50, 3, 4);
  const auto src = make_sample_source(Sample(data));
  Eigen::MatrixXd w(2, 3);
  w << 1.0, -0.4, 0.0, 0.3, 0.0, 1.0;
  const auto mapped = src->linear_map(w);
  const SampleCumulants direct(Eigen::MatrixXd(data * w.transpose()));
  for (std::size_t k = 2; k <= 6; ++k) {
    for (const auto& key : multisets(2, k)) {
      EXPECT_LT(rel_diff(mapped->cumulant(key), direct.cumulant(key)), 1e-8) << k;
    }
  }
  // composition of maps
  Eigen::MatrixXd v(1, 2);
  v << 2.0, -1.0;
  const SampleCumulants twice(Eigen::MatrixXd(data * (v * w).transpose()));
  EXPECT_LT(rel_diff(mapped->linear_map(v)->cumulant({0, 0, 0, 0}), twice.cumulant({0, 0, 0, 0})), 1e-8);
  const auto sel = src->select({2, 0});
  EXPECT_DOUBLE_EQ(sel->cumulant({0, 1, 1}), src->cumulant({2, 0, 0}));
}

TEST(PopulationCumulants, MatchDenseTucker) {
  Eigen::MatrixXd b(3, 5);
  b << 1, 0, 0, 0.7, -0.2, 0.5, 1, 0, 1, 0.4, -0.3, 0.8, 1, 0.6, 1;
  Eigen::MatrixXd kappa(5, 5);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.2, 1.5);
  for (Eigen::Index r = 0; r < 5; ++r) {
    for (Eigen::Index c = 0; c < 5; ++c) kappa(r, c) = u(rng) * (c % 2 ? -1.0 : 1.0);
  }
  const NoiseCumulants noise(kappa, 6);
  const auto src = make_population_source(b, noise);
  for (int k = 2; k <= 6; ++k) {
    std::vector<double> kk;
    for (Eigen::Index j = 0; j < 5; ++j) kk.push_back(kappa(j, k - 2));
    const CumulantTensor t = population_cumulant_tensor(b, noise, k);
    for (const auto& key : multisets(3, static_cast<std::size_t>(k))) {
      const double want = oracle::tucker_entry(b, kk, key);
      EXPECT_NEAR(src->cumulant(key), want, 1e-12 * (1 + std::abs(want)));
      EXPECT_NEAR(t(key), want, 1e-12 * (1 + std::abs(want)));
    }
  }
  Eigen::MatrixXd w(2, 3);
  w << 1, -0.5, 0, 0, 0.2, 1;
  const auto mapped = src->linear_map(w);
  const auto direct = make_population_source(w * b, noise);
  EXPECT_NEAR(mapped->cumulant({0, 0, 1, 1, 1}), direct->cumulant({0, 0, 1, 1, 1}), 1e-12);
  // the generic multilinear expansion agrees with the W B' shortcut
  const MappedCumulants expanded(src, w);
  EXPECT_NEAR(expanded.cumulant({0, 1, 1, 1}), direct->cumulant({0, 1, 1, 1}), 1e-12);
}

TEST(NoiseCumulants, Validation) {
  EXPECT_THROW(NoiseCumulants(Eigen::MatrixXd::Ones(2, 2), 4), Error);
  Eigen::MatrixXd v = Eigen::MatrixXd::Ones(2, 3);
  v(1, 0) = 0.0;
  EXPECT_THROW(NoiseCumulants(v, 4), Error);
  EXPECT_THROW(NoiseCumulants(Eigen::MatrixXd::Ones(2, 6), 7), Error);
  const NoiseCumulants ok(Eigen::MatrixXd::Ones(2, 3), 4);
  EXPECT_EQ(ok.at(1, 4), 1.0);
  EXPECT_THROW(ok.at(1, 5), Error);
}

TEST(CumulantTensor, SymmetricStorage) {
  CumulantTensor t(3, 2);
  t.set(std::vector<std::size_t>{1, 0, 1}, 2.5);
  EXPECT_EQ(t.at({1, 1, 0}), 2.5);
  EXPECT_EQ(t.at({0, 0, 0}), 0.0);
  EXPECT_THROW(t.at({0, 0}), Error);
  EXPECT_THROW(t.at({0, 0, 2}), Error);
  const TensorCumulants src({t});
  EXPECT_EQ(src.cumulant({0, 1, 1}), 2.5);
  EXPECT_THROW(src.cumulant({0, 1}), Error);
}

TEST(BivariateVector, EntryCountsCopiesOfJ) {
  const Eigen::MatrixXd data = skewed_data(25, 2, 6);
  const auto src = make_sample_source(Sample(data));
  const Eigen::VectorXd v = bivariate_cumulant_vector(*src, 0, 1, 4);
  ASSERT_EQ(v.size(), 4);
  EXPECT_DOUBLE_EQ(v(0), src->cumulant({0, 0, 0, 0}));
  EXPECT_DOUBLE_EQ(v(1), src->cumulant({0, 0, 0, 1}));
  EXPECT_DOUBLE_EQ(v(3), src->cumulant({0, 1, 1, 1}));
  EXPECT_THROW(bivariate_cumulant_vector(*src, 1, 1, 3), Error);
}
