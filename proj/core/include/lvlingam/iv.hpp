#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "lvlingam/cumulants.hpp"
#include "lvlingam/graph.hpp"
#include "lvlingam/rootfind.hpp"

namespace lvlingam {

/// Constraints are written R b = offsets, one row per instrument:
/// r_I(b) = b_{Y,I} - sum_i b_{T^i,I} b_i.
struct IvEstimate {
  /// Effects b_{Y,T^i} after projection onto the constraint set.
  Eigen::VectorXd effects;
  /// Root tuple chosen before projection.
  Eigen::VectorXd selected;
  /// |R selected - offsets| before projection.
  double residual = 0.0;
  /// |effects - selected|.
  double projection_distance = 0.0;
  std::vector<std::vector<double>> roots;
  std::vector<int> latent_counts;
  Eigen::MatrixXd constraints;
  Eigen::VectorXd offsets;
};

/// Sigma_{target,i|adj} / Sigma_{i,i|adj} from the order-2 cumulants of `src`
/// (columns are source indices).
double regression_adjust(const CumulantSource& src, std::size_t target, std::size_t i,
                         const std::vector<std::size_t>& adj);

/// Same on an explicit covariance tensor.
double regression_adjust(const CumulantTensor& cov, std::size_t target, std::size_t i,
                         const std::vector<std::size_t>& adj);

/// target - coef * i.
Eigen::VectorXd residualize(const Eigen::VectorXd& target, const Eigen::VectorXd& i, double coef);

/// Source whose column `target` is replaced by target - coef * i.
std::shared_ptr<const CumulantSource> residualize(const CumulantSource& src, std::size_t target,
                                                  std::size_t i, double coef);

/// Observed common ancestors of a and b, as node ids.
NodeSet adjustment_set(const Dag& g, NodeId a, NodeId b);

/// |an(t) ∩ an(y) ∩ latent|.
int iv_latent_count(const Dag& g, NodeId t, NodeId y);

/// Closest point to b on {x : R x = offsets} (least squares when R is rank
/// deficient). Throws kConstraintInfeasible when the system has no solution.
Eigen::VectorXd project_onto_constraints(const Eigen::VectorXd& b, const Eigen::MatrixXd& r,
                                         const Eigen::VectorXd& offsets);

/// One instrument, several treatments. `src` columns follow g.observed().
/// `l_bound` may only lower the per-treatment latent counts read from g.
IvEstimate estimate_iv(const CumulantSource& src, const Dag& g, NodeId instrument,
                       const std::vector<NodeId>& treatments, NodeId outcome,
                       std::optional<int> l_bound = std::nullopt);

/// Several instruments; each treatment is residualized on the instruments
/// valid for it and the estimate is projected onto the intersection of all
/// instrument constraints.
IvEstimate estimate_iv_multi(const CumulantSource& src, const Dag& g,
                             const std::vector<NodeId>& instruments,
                             const std::vector<NodeId>& treatments, NodeId outcome,
                             std::optional<int> l_bound = std::nullopt);

}  // namespace lvlingam
