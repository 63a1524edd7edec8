#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "lvlingam/cumulants.hpp"
#include "lvlingam/graph.hpp"
#include "lvlingam/iv.hpp"
#include "lvlingam/proxy.hpp"
#include "lvlingam/synth.hpp"

namespace lvlingam {

/// |(estimate - truth) / truth|. Throws kUndefinedMetric when |truth| < 1e-12.
double relative_error(double estimate, double truth);

/// Type-7 (linear interpolation) quantile of unsorted values, p in [0, 1].
double quantile(std::vector<double> values, double p);

/// A graph together with the roles an estimator needs.
struct Problem {
  std::string name;
  Dag dag;
  std::optional<ProxyRoles> proxy;
  std::optional<IvRoles> iv;
  /// (cause, outcome) pairs whose effects are estimated, in report order.
  std::vector<std::pair<NodeId, NodeId>> effects;
  /// Latent confounders of the proxy triple; for IV layouts the largest
  /// per-treatment count.
  int latent_count = 0;
};

Problem problem_from_preset(const std::string& name);

/// Roles are node names. For proxy estimators `roles` is Z,T,Y. For IV
/// estimators the last entry is the outcome, entries without another listed
/// node among their ancestors are instruments, the rest treatments. An empty
/// `roles` falls back to the preset roles (error for graph files).
Problem problem_from_graph(const std::string& name, const Dag& dag, Estimator estimator,
                           const std::vector<std::string>& roles);

/// Graph implied by a bare CSV: for proxy estimators Z, T, Y with `latents`
/// latent parents of all three and T -> Y (plus Z -> T for the edge
/// estimators); for IV estimators the first column instruments every
/// treatment, treatments point to the outcome, and each latent confounds
/// every treatment with the outcome.
Problem implied_problem(const std::vector<std::string>& columns, Estimator estimator, int latents);

/// Estimator a preset is evaluated with when none is given.
Estimator default_estimator(const std::string& preset_name);

struct EstimateOutcome {
  /// One value per Problem::effects entry.
  std::vector<double> effects;
  std::variant<ProxyEstimate, IvEstimate> detail;
};

/// `src` columns follow problem.dag.observed(). `latents` lowers the latent
/// count used by the estimator (it may not exceed the graph's own count).
EstimateOutcome run_estimator(const CumulantSource& src, const Problem& problem,
                              Estimator estimator, std::optional<int> latents = std::nullopt);

/// JSON report of an estimate with its diagnostics.
std::string to_json(const EstimateOutcome& outcome, const Problem& problem, Estimator estimator);

struct ExperimentConfig {
  std::optional<std::string> preset;
  std::optional<std::string> graph_file;
  std::vector<std::string> roles;
  std::optional<Estimator> estimator;
  NoiseFamily noise = NoiseFamily::kGamma;
  std::vector<std::size_t> sizes{1000, 10000, 100000};
  std::size_t replicates = 100;
  std::uint64_t seed = 1;
  std::optional<int> latents;
  bool population = false;
};

/// Throws Error(kInput) on an invalid configuration.
void validate(const ExperimentConfig& cfg);

struct ReplicateRow {
  std::size_t n = 0;
  std::size_t replicate = 0;
  std::uint64_t seed = 0;
  std::vector<double> truth;
  std::vector<double> estimate;
  std::vector<double> error;
  /// Mean of `error`; NaN on failure.
  double metric = 0.0;
  bool failed = false;
  std::string failure;
};

struct SummaryRow {
  std::size_t n = 0;
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
  std::size_t failures = 0;
  std::size_t replicates = 0;
  double failure_rate() const;
};

struct ExperimentResult {
  std::string graph;
  Estimator estimator = Estimator::kProxyNoEdge;
  std::vector<std::string> effect_labels;
  std::vector<ReplicateRow> rows;
  std::vector<SummaryRow> summary;
};

/// Seed of replicate `rep` at size n: the base seed hashed with (n, rep). The
/// model is drawn from derive_seed(s, {0}) and the sample from derive_seed(s, {1}).
std::uint64_t replicate_seed(std::uint64_t base, std::size_t n, std::size_t rep);

/// Rows come out in (n, replicate) order. Estimation failures become flagged
/// rows; configuration errors throw.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Per-n median, quartiles and failure count over non-failed rows.
std::vector<SummaryRow> summarize(const std::vector<ReplicateRow>& rows);

void write_results_csv(std::ostream& out, const ExperimentResult& result);
void write_summary_csv(std::ostream& out, const ExperimentResult& result);
/// One row per n: n, median, q25, q75.
void write_plot_csv(std::ostream& out, const ExperimentResult& result);

/// Shortest round-trip decimal form; "nan" for NaN.
std::string format_double(double x);

Sample read_csv(std::istream& in);
Sample read_csv_file(const std::string& path);
void write_csv(std::ostream& out, const Eigen::MatrixXd& data, const std::vector<std::string>& labels);

/// Replaces each target column by its OLS residual on an intercept plus the
/// covariate columns. Output holds the target columns only, in the given
/// order. Throws kRankDeficient naming the dependent covariates.
Sample residualize_covariates(const Sample& s, const std::vector<std::string>& covariates,
                              const std::vector<std::string>& targets);

/// Reorders/selects the columns of `s` to match `names`.
Sample select_columns(const Sample& s, const std::vector<std::string>& names);

}  // namespace lvlingam
