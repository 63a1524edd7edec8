#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "lvlingam/cumulants.hpp"
#include "lvlingam/rootfind.hpp"

namespace lvlingam {

/// Estimators take a three-variable source ordered [Z, T, Y]: proxy,
/// treatment, outcome.
struct ProxyEstimate {
  double effect = 0.0;
  /// sigma[i]: slot of the (Z, Y) roots aligned with slot i of the (Z, T) roots.
  std::vector<std::size_t> sigma;
  /// eta[i]: slot of the (T, Y) roots aligned with slot i of the ratio vector.
  std::vector<std::size_t> eta;
  /// Selection criterion of the returned candidate (0 when there is no selection).
  double residual = 0.0;
  std::vector<double> roots_zt;
  std::vector<double> roots_zy;
  std::vector<double> roots_ty;
  /// Set by the refined estimator when the optimization fell back to its start.
  bool fallback = false;
  std::string warning;
};

struct ProxyOptions {
  MinorRule minor_rule = MinorRule::kTotalLeastSquares;
};

/// Permutation p minimizing sum_i (a_i - b_{p[i]})^2 over all m! candidates
/// (m <= 3), lexicographically smallest on ties. A `free_slot` of a is left
/// out of the sum and takes whichever entry of b remains.
std::vector<std::size_t> match_permutation(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                                           std::optional<std::size_t> free_slot = std::nullopt);

/// No Z -> T edge; l in {1, 2}.
ProxyEstimate estimate_proxy_no_edge(const CumulantSource& src, int l,
                                     const ProxyOptions& opts = {});

/// Z -> T edge allowed; l in {1, 2}.
ProxyEstimate estimate_proxy_edge(const CumulantSource& src, int l, const ProxyOptions& opts = {});

/// Z -> T edge allowed, one latent confounder, covariance-ratio candidates.
ProxyEstimate estimate_proxy_edge_1lat(const CumulantSource& src);

/// estimate_proxy_edge_1lat followed by local minimization of refinement_objective.
ProxyEstimate estimate_proxy_edge_1lat_refined(const CumulantSource& src);

/// q(b) = (c_TY - b c_ZY) / (c_TT - b c_ZT).
double q_ratio(const CumulantSource& src, double b);

/// c_133 c_223 / (c_113 c_233) of [Z, T, Y - bT].
double refinement_g(const CumulantSource& src, double b);

/// (b - q(g(b)))^2 + (b - b_hat)^2.
double refinement_objective(const CumulantSource& src, double b, double b_hat);

enum class Estimator {
  kProxyNoEdge,
  kProxyEdge,
  kProxyEdge1Lat,
  kProxyEdge1LatRefined,
  kIv,
  kIvMulti,
};

std::string_view to_string(Estimator e);
Estimator parse_estimator(std::string_view name);
bool is_proxy_estimator(Estimator e);

}  // namespace lvlingam
