#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lvlingam/cumulants.hpp"
#include "lvlingam/graph.hpp"

namespace lvlingam {

/// kDegenerate draws every noise as exactly zero; it exists for tests and has
/// no cumulants.
enum class NoiseFamily { kGamma, kBeta, kDegenerate };

std::string_view to_string(NoiseFamily family);
/// Accepts "gamma" and "beta".
NoiseFamily parse_noise_family(std::string_view name);

/// Gamma: (shape, scale). Beta: (alpha, beta).
struct NoiseParams {
  double first = 0.0;
  double second = 0.0;
};

/// Realized noise parameters, one per mixing-matrix column.
struct NoiseSpec {
  NoiseFamily family = NoiseFamily::kGamma;
  std::vector<NoiseParams> params;
};

struct WeightedModel {
  Dag dag;
  /// Node-indexed weights, a(j, i) on the edge i -> j.
  Eigen::MatrixXd a;
  /// p_o x p mixing matrix; rows follow dag.observed(), columns observed then latent.
  Eigen::MatrixXd bprime;
  NoiseSpec noise;
  /// Per latent column (in dag.latent() order), the factor its noise is
  /// multiplied by so that the first nonzero entry of its column, taken in
  /// topological order, equals 1.
  Eigen::VectorXd latent_scale;

  /// Total effect b'_{effect, cause}; `effect` must be observed.
  double total_effect(NodeId cause, NodeId effect) const;
  /// All nonzero total effects between distinct nodes, keyed (cause, effect).
  std::map<std::pair<NodeId, NodeId>, double> true_effects() const;

  /// Mixing matrix with latent columns divided by `latent_scale`.
  Eigen::MatrixXd scaled_bprime() const;
  /// Noise cumulants matching scaled_bprime() (latent rows times scale^k).
  NoiseCumulants scaled_noise_cumulants(int max_order) const;

  std::string to_json() const;
};

/// Gamma(shape a, scale theta): kappa_k = a theta^k (k-1)!.
double gamma_cumulant(double shape, double scale, int order);
/// Beta(alpha, beta) cumulant from raw moments through the moment-cumulant recursion.
double beta_cumulant(double alpha, double beta, int order);

/// p x p matrix (I - A)^{-1} restricted to observed rows, columns in
/// mixing-matrix order. `a` is node-indexed.
Eigen::MatrixXd mixing_matrix(const Dag& g, const Eigen::MatrixXd& a);

/// Validates weights against the graph and builds the model. Used by
/// draw_model and by tests that need fixed weights.
WeightedModel make_model(const Dag& g, Eigen::MatrixXd a, NoiseSpec noise);

/// Weights uniform on [-0.9, -0.5] U [0.5, 0.9]; Gamma shape ~ U(0.1, 1),
/// scale ~ U(0.1, 0.5); Beta alpha ~ U(1.5, 2), beta ~ U(2, 10).
WeightedModel draw_model(const Dag& g, NoiseFamily family, std::uint64_t seed);

/// n x p_o draws of the observed variables (rows of B' N); each noise is
/// centered at its population mean before mixing.
Eigen::MatrixXd sample_matrix(const WeightedModel& m, std::size_t n, std::uint64_t seed);

/// sample_matrix() wrapped as a labelled Sample; n >= 2.
Sample sample_data(const WeightedModel& m, std::size_t n, std::uint64_t seed);

/// Analytic cumulants of orders 2..max_order of every noise.
NoiseCumulants population_noise_cumulants(const WeightedModel& m, int max_order);

}  // namespace lvlingam
