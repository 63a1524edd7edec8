#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "lvlingam/cumulants.hpp"

namespace lvlingam {

/// Highest number of latent confounders the polynomial construction supports.
inline constexpr int kMaxLatents = 2;

/// Order of the highest cumulant needed for `l` latent confounders:
/// (l+2) + ceil((-3 + sqrt(8l + 17)) / 2).
int required_order(int l);

/// Univariate real polynomial, ascending coefficients.
struct EffectPolynomial {
  Eigen::VectorXd coefficients;
  int latent_count = 0;

  int degree() const { return static_cast<int>(coefficients.size()) - 1; }
  double operator()(double b) const;
};

/// How the l = 2 construction turns the available cumulant slices into coefficients.
enum class MinorRule {
  kTotalLeastSquares,  ///< null vector of all row-normalized rows (no single minor)
  kBestConditioned,    ///< largest sigma_min / sigma_max of the row-normalized rows
  kLowestOrder,        ///< first l+1 rows in increasing cumulant order
};

/// Degree-(l+1) polynomial for the pair (i, j) whose roots are the ratios
/// b_j,s / b_i,s over every source s reaching i. l = 0 gives c_ij / c_ii,
/// l = 1 the closed form in order-3/4 cumulants, l = 2 the order 4..6 slices.
EffectPolynomial build_effect_polynomial(const CumulantSource& src, std::size_t i,
                                         std::size_t j, int l,
                                         MinorRule rule = MinorRule::kTotalLeastSquares);

/// Degree-l polynomial for a pair in which j has no source that i lacks and i
/// has exactly one source (its own noise) that j lacks: the zero root is
/// divided out and the remaining l roots are those of the l latent sources.
/// Rows use only cumulants that contain both i and j.
EffectPolynomial build_deflated_polynomial(const CumulantSource& src, std::size_t i,
                                           std::size_t j, int l,
                                           MinorRule rule = MinorRule::kTotalLeastSquares);

/// Raw row matrix (before the monomial row is adjoined) used by the l = 2
/// construction; exposed for diagnostics and tests.
Eigen::MatrixXd effect_polynomial_rows(const CumulantSource& src, std::size_t i, std::size_t j,
                                       int l, bool deflated);

/// Coefficients of det([1, b, ..., b^d]; rows) by Laplace expansion on the
/// monomial row. `rows` is d x (d+1).
Eigen::VectorXd determinant_polynomial(const Eigen::MatrixXd& rows);

/// Real parts of all roots, ascending. Throws kNoRealRoot when every root lies
/// farther than 1e-6 * (1 + |c|_inf) from the real axis (coefficients are first
/// normalized by their inf-norm), kDegenerateInput on a vanishing leading
/// coefficient.
std::vector<double> real_roots(const EffectPolynomial& p);

/// M(b, k) with rows [b_1^r ... b_m^r], r = 0..k-1.
Eigen::MatrixXd vandermonde(const std::vector<double>& b, int k);

/// Solves M(b, k) c = rhs for square systems (k = b.size()). Throws
/// kNearSingular when two entries of b are closer than 1e-4 * max(1, |b|_inf).
Eigen::VectorXd solve_exogenous_cumulants(const std::vector<double>& b, int k,
                                          const Eigen::VectorXd& rhs);

}  // namespace lvlingam
