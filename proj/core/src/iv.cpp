#include "lvlingam/iv.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include <Eigen/Eigenvalues>

#include "lvlingam/errors.hpp"

namespace lvlingam {

namespace {

double adjust(const std::function<double(std::size_t, std::size_t)>& cov, std::size_t target,
              std::size_t i, const std::vector<std::size_t>& adj) {
  double s_ti = cov(target, i);
  double s_ii = cov(i, i);
  if (!adj.empty()) {
    const auto m = static_cast<Eigen::Index>(adj.size());
    Eigen::MatrixXd s_cc(m, m);
    Eigen::VectorXd s_ct(m), s_ci(m);
    for (Eigen::Index a = 0; a < m; ++a) {
      for (Eigen::Index b = 0; b < m; ++b) s_cc(a, b) = cov(adj[a], adj[b]);
      s_ct(a) = cov(adj[a], target);
      s_ci(a) = cov(adj[a], i);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s_cc, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    if (!(ev(0) > 1e-12 * std::max(1.0, std::abs(ev(m - 1))))) {
      throw Error(ErrorCode::kIllConditionedAdjustment, "adjustment covariance is singular");
    }
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(s_cc);
    s_ti -= s_ct.dot(ldlt.solve(s_ci));
    s_ii -= s_ci.dot(ldlt.solve(s_ci));
  }
  if (!(s_ii > 1e-14 * std::abs(cov(i, i))) || !std::isfinite(s_ti)) {
    throw Error(ErrorCode::kIllConditionedAdjustment, "conditional instrument variance vanishes");
  }
  return s_ti / s_ii;
}

std::vector<std::size_t> columns_of(const Dag& g, const NodeSet& nodes) {
  std::vector<std::size_t> out;
  for (NodeId v : nodes) out.push_back(g.observed_index(v));
  return out;
}

void require_observed(const Dag& g, NodeId v, const char* role) {
  g.check_node(v);
  if (!g.is_observed(v)) throw Error(ErrorCode::kInput, std::string(role) + " must be observed");
}

IvEstimate estimate(const CumulantSource& src, const Dag& g, const std::vector<NodeId>& instruments,
                    const std::vector<NodeId>& treatments, NodeId outcome,
                    std::optional<int> l_bound, bool multi) {
  if (treatments.empty()) throw Error(ErrorCode::kInput, "at least one treatment is required");
  if (treatments.size() > 3) throw Error(ErrorCode::kUnsupported, "at most three treatments");
  if (instruments.empty()) throw Error(ErrorCode::kInput, "at least one instrument is required");
  if (src.dim() != g.observed().size()) {
    throw Error(ErrorCode::kInput, "source columns must match the observed nodes of the graph");
  }
  if (l_bound && *l_bound < 0) throw Error(ErrorCode::kInput, "latent bound must be non-negative");
  require_observed(g, outcome, "outcome");
  for (NodeId t : treatments) require_observed(g, t, "treatment");
  for (NodeId i : instruments) require_observed(g, i, "instrument");

  const std::size_t k = treatments.size();
  const std::size_t s = instruments.size();
  const std::size_t y_col = g.observed_index(outcome);

  // valid[j][i]: instrument j is valid for treatment i.
  std::vector<std::vector<bool>> valid(s, std::vector<bool>(k, false));
  if (!multi) {
    if (!is_valid_instrument(g, instruments[0], treatments, outcome)) {
      throw Error(ErrorCode::kPrecondition, g.name(instruments[0]) + " is not a valid instrument");
    }
    valid[0].assign(k, true);
  } else {
    for (std::size_t j = 0; j < s; ++j) {
      for (std::size_t i = 0; i < k; ++i) {
        valid[j][i] = is_valid_instrument_for(g, instruments[j], treatments[i], treatments, outcome);
      }
    }
    for (std::size_t i = 0; i < k; ++i) {
      bool any = false;
      for (std::size_t j = 0; j < s; ++j) any = any || valid[j][i];
      if (!any) {
        throw Error(ErrorCode::kPrecondition, "treatment " + g.name(treatments[i]) + " has no valid instrument");
      }
    }
  }

  IvEstimate est;
  est.constraints = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(k));
  est.offsets = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(s));
  const auto cov = [&](std::size_t a, std::size_t b) { return src.cumulant({a, b}); };

  const auto d = static_cast<Eigen::Index>(src.dim());
  Eigen::MatrixXd w = Eigen::MatrixXd::Identity(d, d);
  for (std::size_t j = 0; j < s; ++j) {
    const NodeId inst = instruments[j];
    const std::size_t i_col = g.observed_index(inst);
    const double b_yi = adjust(cov, y_col, i_col, columns_of(g, adjustment_set(g, inst, outcome)));
    est.offsets(static_cast<Eigen::Index>(j)) = b_yi;
    w(static_cast<Eigen::Index>(y_col), static_cast<Eigen::Index>(i_col)) -= b_yi;
    for (std::size_t i = 0; i < k; ++i) {
      const NodeId t = treatments[i];
      if (!ancestors(g, t).contains(inst)) continue;
      const std::size_t t_col = g.observed_index(t);
      const double b_ti = adjust(cov, t_col, i_col, columns_of(g, adjustment_set(g, inst, t)));
      est.constraints(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = b_ti;
      if (valid[j][i]) w(static_cast<Eigen::Index>(t_col), static_cast<Eigen::Index>(i_col)) -= b_ti;
    }
  }
  const auto residualized = src.linear_map(w);

  est.roots.resize(k);
  est.latent_counts.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    int l = iv_latent_count(g, treatments[i], outcome);
    if (l_bound) l = std::min(l, *l_bound);
    if (l > kMaxLatents) {
      throw Error(ErrorCode::kUnsupported, "treatment " + g.name(treatments[i]) + " has " +
                                               std::to_string(l) + " latent confounders");
    }
    est.latent_counts[i] = l;
    est.roots[i] = real_roots(
        build_effect_polynomial(*residualized, g.observed_index(treatments[i]), y_col, l));
  }

  // Cartesian product of the per-treatment root vectors.
  const auto score = [&](const Eigen::VectorXd& b) {
    if (!multi) return std::abs(est.offsets(0) - est.constraints.row(0).dot(b));
    return (project_onto_constraints(b, est.constraints, est.offsets) - b).squaredNorm();
  };
  std::vector<std::size_t> pick(k, 0);
  Eigen::VectorXd best;
  double best_score = std::numeric_limits<double>::infinity();
  while (true) {
    Eigen::VectorXd b(static_cast<Eigen::Index>(k));
    for (std::size_t i = 0; i < k; ++i) b(static_cast<Eigen::Index>(i)) = est.roots[i][pick[i]];
    const double sc = score(b);
    if (best.size() == 0 || sc < best_score - 1e-9) {
      best_score = sc;
      best = b;
    } else if (std::abs(sc - best_score) <= 1e-9 && b.norm() < best.norm()) {
      best_score = std::min(best_score, sc);
      best = b;
    }
    std::size_t pos = 0;
    while (pos < k && ++pick[pos] == est.roots[pos].size()) pick[pos++] = 0;
    if (pos == k) break;
  }

  est.selected = best;
  est.residual = (est.constraints * best - est.offsets).norm();
  est.effects = project_onto_constraints(best, est.constraints, est.offsets);
  est.projection_distance = (est.effects - best).norm();
  return est;
}

}  // namespace

double regression_adjust(const CumulantSource& src, std::size_t target, std::size_t i,
                         const std::vector<std::size_t>& adj) {
  if (target == i) throw Error(ErrorCode::kInput, "target and instrument must differ");
  return adjust([&](std::size_t a, std::size_t b) { return src.cumulant({a, b}); }, target, i, adj);
}

double regression_adjust(const CumulantTensor& cov, std::size_t target, std::size_t i,
                         const std::vector<std::size_t>& adj) {
  if (cov.order() != 2) throw Error(ErrorCode::kInput, "regression adjustment needs a covariance");
  if (target == i) throw Error(ErrorCode::kInput, "target and instrument must differ");
  return adjust([&](std::size_t a, std::size_t b) { return cov.at({a, b}); }, target, i, adj);
}

Eigen::VectorXd residualize(const Eigen::VectorXd& target, const Eigen::VectorXd& i, double coef) {
  if (target.size() != i.size()) throw Error(ErrorCode::kInput, "column lengths differ");
  return target - coef * i;
}

std::shared_ptr<const CumulantSource> residualize(const CumulantSource& src, std::size_t target,
                                                  std::size_t i, double coef) {
  if (target >= src.dim() || i >= src.dim()) throw Error(ErrorCode::kInput, "column out of range");
  const auto d = static_cast<Eigen::Index>(src.dim());
  Eigen::MatrixXd w = Eigen::MatrixXd::Identity(d, d);
  w(static_cast<Eigen::Index>(target), static_cast<Eigen::Index>(i)) -= coef;
  return src.linear_map(w);
}

NodeSet adjustment_set(const Dag& g, NodeId a, NodeId b) {
  const NodeSet an_a = ancestors(g, a);
  const NodeSet an_b = ancestors(g, b);
  NodeSet out;
  for (NodeId v : an_a) {
    if (g.is_observed(v) && an_b.contains(v)) out.insert(v);
  }
  return out;
}

int iv_latent_count(const Dag& g, NodeId t, NodeId y) {
  const NodeSet an_t = ancestors(g, t);
  const NodeSet an_y = ancestors(g, y);
  int count = 0;
  for (NodeId v : an_t) {
    if (g.is_latent(v) && an_y.contains(v)) ++count;
  }
  return count;
}

Eigen::VectorXd project_onto_constraints(const Eigen::VectorXd& b, const Eigen::MatrixXd& r,
                                         const Eigen::VectorXd& offsets) {
  if (r.cols() != b.size() || r.rows() != offsets.size()) {
    throw Error(ErrorCode::kInput, "constraint dimensions do not match");
  }
  const Eigen::VectorXd gap = offsets - r * b;
  Eigen::VectorXd out;
  if (r.rows() == 1) {
    const double nn = r.row(0).squaredNorm();
    if (nn == 0.0) {
      if (std::abs(gap(0)) > 1e-9 * (1.0 + std::abs(offsets(0)))) {
        throw Error(ErrorCode::kConstraintInfeasible, "zero constraint with nonzero offset");
      }
      return b;
    }
    out = b + r.row(0).transpose() * (gap(0) / nn);
  } else {
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(r);
    out = b + cod.solve(gap);
  }
  const double miss = (r * out - offsets).norm();
  if (!(miss <= 1e-9 * (1.0 + offsets.norm()))) {
    throw Error(ErrorCode::kConstraintInfeasible, "instrument constraints are inconsistent");
  }
  return out;
}

IvEstimate estimate_iv(const CumulantSource& src, const Dag& g, NodeId instrument,
                       const std::vector<NodeId>& treatments, NodeId outcome,
                       std::optional<int> l_bound) {
  return estimate(src, g, {instrument}, treatments, outcome, l_bound, false);
}

IvEstimate estimate_iv_multi(const CumulantSource& src, const Dag& g,
                             const std::vector<NodeId>& instruments,
                             const std::vector<NodeId>& treatments, NodeId outcome,
                             std::optional<int> l_bound) {
  return estimate(src, g, instruments, treatments, outcome, l_bound, true);
}

}  // namespace lvlingam
