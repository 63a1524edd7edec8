#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "lvlingam/errors.hpp"
#include "lvlingam/harness.hpp"

using namespace lvlingam;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kInput;
}

std::string results_text(const ExperimentResult& r) {
  std::ostringstream out;
  write_results_csv(out, r);
  write_summary_csv(out, r);
  write_plot_csv(out, r);
  return out.str();
}

}  // namespace

TEST(RelativeError, Examples) {
  EXPECT_EQ(relative_error(0.7, 0.7), 0.0);
  EXPECT_EQ(relative_error(0.0, 0.5), 1.0);
  EXPECT_NEAR(relative_error(0.55, 0.5), 0.1, 1e-15);
  EXPECT_EQ(code_of([] { relative_error(1.0, 1e-13); }), ErrorCode::kUndefinedMetric);
}

TEST(Quantile, TypeSeven) {
  const std::vector<double> v{4, 1, 3, 2};
  EXPECT_DOUBLE_EQ(quantile(v, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(quantile(v, 0.25), 1.75);
  EXPECT_DOUBLE_EQ(quantile(v, 0.75), 3.25);
  EXPECT_DOUBLE_EQ(quantile(v, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(quantile(v, 1.0), 4.0);
  EXPECT_TRUE(std::isnan(quantile({}, 0.5)));
}

TEST(Config, Validation) {
  ExperimentConfig cfg;
  EXPECT_THROW(validate(cfg), Error);
  cfg.preset = "G1";
  EXPECT_NO_THROW(validate(cfg));
  cfg.sizes = {1000, 1000};
  EXPECT_THROW(validate(cfg), Error);
  cfg.sizes = {1000};
  cfg.replicates = 0;
  EXPECT_THROW(validate(cfg), Error);
  cfg.replicates = 1;
  cfg.graph_file = "g.json";
  EXPECT_THROW(validate(cfg), Error);
}

TEST(Experiment, PopulationModeEveryPairing) {
  const std::vector<std::pair<std::string, Estimator>> pairings{
      {"G1", Estimator::kProxyNoEdge},
      {"G2", Estimator::kProxyNoEdge},
      {"G3", Estimator::kProxyEdge},
      {"G3", Estimator::kProxyEdge1Lat},
      {"G3", Estimator::kProxyEdge1LatRefined},
      {"PROXY_2LAT_EDGE", Estimator::kProxyEdge},
      {"IV_2T_1I", Estimator::kIv},
      {"IV_2T_1I", Estimator::kIvMulti},
      {"IV_3T_2I", Estimator::kIvMulti},
  };
  for (const auto& [name, est] : pairings) {
    ExperimentConfig cfg;
    cfg.preset = name;
    cfg.estimator = est;
    cfg.sizes = {1};
    cfg.replicates = 1;
    cfg.population = true;
    const ExperimentResult r = run_experiment(cfg);
    ASSERT_EQ(r.rows.size(), 1u);
    EXPECT_FALSE(r.rows[0].failed) << name << " " << to_string(est) << " " << r.rows[0].failure;
    EXPECT_LT(r.rows[0].metric, 1e-6) << name << " " << to_string(est);
  }
}

TEST(Experiment, IvMetricAveragesTreatments) {
  ExperimentConfig cfg;
  cfg.preset = "IV_2T_1I";
  cfg.sizes = {2000};
  cfg.replicates = 4;
  const ExperimentResult r = run_experiment(cfg);
  ASSERT_EQ(r.effect_labels, (std::vector<std::string>{"T1->Y", "T2->Y"}));
  for (const auto& row : r.rows) {
    if (row.failed) continue;
    EXPECT_DOUBLE_EQ(row.metric, (row.error[0] + row.error[1]) / 2);
  }
}

TEST(Experiment, DeterministicAndSummaryRecomputes) {
  ExperimentConfig cfg;
  cfg.preset = "G1";
  cfg.sizes = {500, 2000};
  cfg.replicates = 12;
  cfg.seed = 77;
  const ExperimentResult a = run_experiment(cfg);
  const ExperimentResult b = run_experiment(cfg);
  EXPECT_EQ(results_text(a), results_text(b));
  ASSERT_EQ(a.rows.size(), 24u);
  ASSERT_EQ(a.summary.size(), 2u);
  for (const auto& s : a.summary) {
    std::vector<double> ok;
    std::size_t failed = 0;
    for (const auto& row : a.rows) {
      if (row.n != s.n) continue;
      if (row.failed) {
        ++failed;
      } else {
        ok.push_back(row.metric);
      }
    }
    std::sort(ok.begin(), ok.end());
    const std::size_t m = ok.size();
    const double median = m % 2 ? ok[m / 2] : 0.5 * (ok[m / 2 - 1] + ok[m / 2]);
    EXPECT_DOUBLE_EQ(s.median, median);
    EXPECT_EQ(s.failures, failed);
    EXPECT_EQ(s.replicates, 12u);
  }
  cfg.seed = 78;
  EXPECT_NE(results_text(run_experiment(cfg)), results_text(a));
}

TEST(Experiment, IncompatibleEstimatorIsConfigError) {
  ExperimentConfig cfg;
  cfg.preset = "IV_2T_1I";
  cfg.estimator = Estimator::kProxyNoEdge;
  EXPECT_EQ(code_of([&] { run_experiment(cfg); }), ErrorCode::kInput);
  cfg.preset = "G1";
  cfg.latents = 2;
  EXPECT_EQ(code_of([&] { run_experiment(cfg); }), ErrorCode::kInput);
}

TEST(Problem, RolesFromGraph) {
  const Dag g = preset("IV_3T_2I").dag;
  const Problem p = problem_from_graph("x", g, Estimator::kIvMulti, {"I1", "I2", "T1", "T2", "T3", "Y"});
  EXPECT_EQ(p.iv->instruments, (std::vector<NodeId>{0, 1}));
  EXPECT_EQ(p.iv->treatments, (std::vector<NodeId>{4, 5, 6}));
  EXPECT_EQ(p.latent_count, 2);
  EXPECT_THROW(problem_from_graph("x", g, Estimator::kProxyEdge, {"I1", "T1"}), Error);
  EXPECT_THROW(problem_from_graph("x", g, Estimator::kProxyEdge, {"I1", "T1", "L1"}), Error);
  const Problem q = implied_problem({"a", "b", "c"}, Estimator::kProxyEdge, 2);
  EXPECT_EQ(q.latent_count, 2);
  EXPECT_TRUE(q.dag.has_edge(0, 1));
  const Problem r = implied_problem({"z", "t1", "t2", "y"}, Estimator::kIv, 1);
  EXPECT_EQ(r.iv->instruments, (std::vector<NodeId>{0}));
  EXPECT_EQ(r.effects.size(), 2u);
}

TEST(Csv, RoundTrip) {
  Eigen::MatrixXd d(3, 2);
  d << 0.1, -2.5e-17, 1.0 / 3.0, 4e10, -7, 0;
  std::stringstream io;
  write_csv(io, d, {"a", "b"});
  const Sample s = read_csv(io);
  EXPECT_EQ(s.labels, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(s.data, d);
  std::istringstream bad("a,b\n1,2\n3\n");
  EXPECT_THROW(read_csv(bad), Error);
  std::istringstream text("a,b\n1,x\n2,3\n");
  EXPECT_THROW(read_csv(text), Error);
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(std::nan("")), "nan");
}

TEST(ResidualizeCovariates, Identities) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> z;
  const Eigen::Index n = 100000;
  Eigen::MatrixXd d(n, 4);
  for (Eigen::Index r = 0; r < n; ++r) {
    const double x = z(rng), e = z(rng), w = z(rng);
    d.row(r) << x, 2 * x + e, w, e;
  }
  const Sample s(d, {"x", "y", "w", "e"});
  const Sample same = residualize_covariates(s, {"x"}, {"x"});
  EXPECT_LT(same.data.cwiseAbs().maxCoeff(), 1e-10);
  const Sample ry = residualize_covariates(s, {"x"}, {"y"});
  const Eigen::VectorXd e = d.col(3).array() - d.col(3).mean();
  EXPECT_LT((ry.data.col(0) - e).cwiseAbs().maxCoeff(), 0.05);
  const Sample rw = residualize_covariates(s, {"x"}, {"w"});
  const Eigen::VectorXd w = d.col(2).array() - d.col(2).mean();
  const double corr = rw.data.col(0).dot(w) / (rw.data.col(0).norm() * w.norm());
  EXPECT_GT(corr, 0.9998);
  Eigen::MatrixXd dup = d;
  dup.col(2) = 3 * d.col(0);
  try {
    residualize_covariates(Sample(dup, s.labels), {"x", "w"}, {"y"});
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::kRankDeficient);
    EXPECT_NE(std::string(err.what()).find_first_of("xw"), std::string::npos);
  }
}
