#include "lvlingam/rootfind.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include <Eigen/Eigenvalues>

#include "lvlingam/errors.hpp"

namespace lvlingam {

int required_order(int l) {
  if (l < 0) throw Error(ErrorCode::kInput, "latent count must be non-negative");
  // smallest m with 2m >= -3 + sqrt(8l + 17), i.e. (2m + 3)^2 >= 8l + 17
  int m = 0;
  while ((2 * m + 3) * (2 * m + 3) < 8 * l + 17) ++m;
  return l + 2 + m;
}

double EffectPolynomial::operator()(double b) const {
  double acc = 0.0;
  for (Eigen::Index r = coefficients.size() - 1; r >= 0; --r) acc = acc * b + coefficients(r);
  return acc;
}

namespace {

void check_pair(const CumulantSource& src, std::size_t i, std::size_t j, int l) {
  if (l < 0 || l > kMaxLatents) {
    throw Error(ErrorCode::kUnsupported,
                "effect polynomial supports 0.." + std::to_string(kMaxLatents) + " latents, got " +
                    std::to_string(l));
  }
  if (i == j) throw Error(ErrorCode::kInput, "effect polynomial needs two distinct columns");
  if (i >= src.dim() || j >= src.dim()) throw Error(ErrorCode::kInput, "column out of range");
}

double multiset_cumulant(const CumulantSource& src, std::size_t i, std::size_t count_i,
                         std::size_t j, std::size_t count_j) {
  std::vector<std::size_t> idx(count_i, i);
  idx.insert(idx.end(), count_j, j);
  return src.cumulant(idx);
}

double selection_score(const Eigen::MatrixXd& rows) {
  Eigen::MatrixXd normalized = rows;
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    const double norm = rows.row(r).norm();
    if (norm == 0.0 || !std::isfinite(norm)) return 0.0;
    normalized.row(r) /= norm;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(normalized);
  const auto& sv = svd.singularValues();
  return sv(0) > 0.0 ? sv(sv.size() - 1) / sv(0) : 0.0;
}

Eigen::MatrixXd choose_rows(const Eigen::MatrixXd& candidates, Eigen::Index count, MinorRule rule) {
  if (candidates.rows() < count) {
    throw Error(ErrorCode::kDegenerateInput, "not enough cumulant rows for the minor");
  }
  if (rule == MinorRule::kLowestOrder || candidates.rows() == count) {
    return candidates.topRows(count);
  }
  // Enumerate subsets with a selection mask, lexicographic in row index.
  const auto total = candidates.rows();
  std::vector<bool> mask(static_cast<std::size_t>(total), false);
  std::fill(mask.begin(), mask.begin() + count, true);
  Eigen::MatrixXd best;
  double best_score = -1.0;
  do {
    Eigen::MatrixXd sub(count, candidates.cols());
    Eigen::Index r = 0;
    for (Eigen::Index c = 0; c < total; ++c) {
      if (mask[static_cast<std::size_t>(c)]) sub.row(r++) = candidates.row(c);
    }
    const double score = selection_score(sub);
    if (score > best_score) {
      best_score = score;
      best = std::move(sub);
    }
  } while (std::prev_permutation(mask.begin(), mask.end()));
  return best;
}

Eigen::VectorXd null_vector(const Eigen::MatrixXd& rows) {
  Eigen::MatrixXd normalized = rows;
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    const double norm = rows.row(r).norm();
    if (norm == 0.0 || !std::isfinite(norm)) {
      throw Error(ErrorCode::kDegenerateInput, "vanishing cumulant row");
    }
    normalized.row(r) /= norm;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(normalized, Eigen::ComputeFullV);
  return svd.matrixV().col(rows.cols() - 1);
}

EffectPolynomial finish(Eigen::VectorXd coefficients, int latent_count) {
  if (!coefficients.allFinite()) {
    throw Error(ErrorCode::kDegenerateInput, "non-finite effect polynomial coefficients");
  }
  const double scale = coefficients.cwiseAbs().maxCoeff();
  if (scale == 0.0) throw Error(ErrorCode::kDegenerateInput, "effect polynomial vanishes");
  if (std::abs(coefficients(coefficients.size() - 1)) < 1e-10 * scale) {
    throw Error(ErrorCode::kDegenerateInput, "effect polynomial leading coefficient vanishes");
  }
  return EffectPolynomial{std::move(coefficients), latent_count};
}

}  // namespace

Eigen::MatrixXd effect_polynomial_rows(const CumulantSource& src, std::size_t i, std::size_t j,
                                       int l, bool deflated) {
  check_pair(src, i, j, l);
  const auto lu = static_cast<std::size_t>(l);
  // A row of order k is fixed by a prefix of (k - l - 2) indices holding t
  // copies of j; entry m of the row appends a loop with m copies of j.
  const int loop = deflated ? l : l + 1;
  const int top = deflated && l <= 1 ? l + 2 : required_order(l);
  if (top > src.max_order()) {
    throw Error(ErrorCode::kUnsupportedOrder, "source provides cumulants up to order " +
                                                  std::to_string(src.max_order()) + ", need " +
                                                  std::to_string(top));
  }
  std::vector<Eigen::VectorXd> rows;
  for (int k = l + 2; k <= top; ++k) {
    const auto prefix = static_cast<std::size_t>(k - l - 2);
    for (std::size_t t = 0; t <= prefix; ++t) {
      Eigen::VectorXd row(loop + 1);
      for (int m = 0; m <= loop; ++m) {
        const auto mu = static_cast<std::size_t>(m);
        std::size_t ci = (prefix - t) + 1 + (lu + 1 - mu);
        std::size_t cj = t + mu;
        if (deflated) {
          ci = (prefix - t) + 1 + (lu - mu);
          cj = t + 1 + mu;
        }
        row(m) = multiset_cumulant(src, i, ci, j, cj);
      }
      rows.push_back(std::move(row));
    }
  }
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), loop + 1);
  for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = rows[r];
  return out;
}

Eigen::VectorXd determinant_polynomial(const Eigen::MatrixXd& rows) {
  const Eigen::Index d = rows.rows();
  if (rows.cols() != d + 1) throw Error(ErrorCode::kInput, "minor rows must be d x (d+1)");
  Eigen::VectorXd coef(d + 1);
  for (Eigen::Index m = 0; m <= d; ++m) {
    Eigen::MatrixXd minor(d, d);
    for (Eigen::Index c = 0, out = 0; c <= d; ++c) {
      if (c == m) continue;
      minor.col(out++) = rows.col(c);
    }
    const double det = d == 0 ? 1.0 : minor.determinant();
    coef(m) = (m % 2 == 0 ? 1.0 : -1.0) * det;
  }
  return coef;
}

EffectPolynomial build_effect_polynomial(const CumulantSource& src, std::size_t i, std::size_t j,
                                         int l, MinorRule rule) {
  check_pair(src, i, j, l);
  if (required_order(l) > src.max_order()) {
    throw Error(ErrorCode::kUnsupportedOrder,
                "need cumulants up to order " + std::to_string(required_order(l)));
  }
  if (l == 0) {
    Eigen::MatrixXd row(1, 2);
    row << src.cumulant({i, i}), src.cumulant({i, j});
    return finish(determinant_polynomial(row), 0);
  }
  if (l == 1) {
    const double c111 = src.cumulant({i, i, i});
    const double c112 = src.cumulant({i, i, j});
    const double c122 = src.cumulant({i, j, j});
    const double c1112 = src.cumulant({i, i, i, j});
    const double c1122 = src.cumulant({i, i, j, j});
    const double c1222 = src.cumulant({i, j, j, j});
    Eigen::VectorXd coef(3);
    coef(2) = c1112 * c112 - c1122 * c111;
    coef(1) = c1222 * c111 - c1112 * c122;
    coef(0) = -(c1222 * c112 - c1122 * c122);
    return finish(std::move(coef), 1);
  }
  const Eigen::MatrixXd rows = effect_polynomial_rows(src, i, j, l, false);
  if (rule == MinorRule::kTotalLeastSquares) return finish(null_vector(rows), l);
  return finish(determinant_polynomial(choose_rows(rows, l + 1, rule)), l);
}

EffectPolynomial build_deflated_polynomial(const CumulantSource& src, std::size_t i,
                                           std::size_t j, int l, MinorRule rule) {
  check_pair(src, i, j, l);
  if (l == 0) throw Error(ErrorCode::kUnsupported, "deflated polynomial needs l >= 1");
  const Eigen::MatrixXd rows = effect_polynomial_rows(src, i, j, l, true);
  if (rule == MinorRule::kTotalLeastSquares) return finish(null_vector(rows), l);
  return finish(determinant_polynomial(choose_rows(rows, l, rule)), l);
}

std::vector<double> real_roots(const EffectPolynomial& p) {
  const Eigen::Index d = p.coefficients.size() - 1;
  if (d < 1) throw Error(ErrorCode::kInput, "root finding needs degree >= 1");
  if (!p.coefficients.allFinite()) throw Error(ErrorCode::kDegenerateInput, "non-finite coefficients");
  const double scale = p.coefficients.cwiseAbs().maxCoeff();
  if (scale == 0.0) throw Error(ErrorCode::kDegenerateInput, "zero polynomial");
  const Eigen::VectorXd c = p.coefficients / scale;
  if (std::abs(c(d)) < 1e-10) {
    throw Error(ErrorCode::kDegenerateInput, "leading coefficient vanishes");
  }
  const double tol = 1e-6 * (1.0 + c.cwiseAbs().maxCoeff());

  std::vector<std::complex<double>> roots;
  if (d == 1) {
    roots.emplace_back(-c(0) / c(1), 0.0);
  } else if (d == 2) {
    const double a = c(2), b = c(1), cc = c(0);
    const double disc = b * b - 4.0 * a * cc;
    if (disc >= 0.0) {
      const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
      if (q == 0.0) {
        roots.assign(2, {0.0, 0.0});
      } else {
        roots.emplace_back(q / a, 0.0);
        roots.emplace_back(cc / q, 0.0);
      }
    } else {
      const double re = -b / (2.0 * a);
      const double im = std::sqrt(-disc) / (2.0 * std::abs(a));
      roots.emplace_back(re, im);
      roots.emplace_back(re, -im);
    }
  } else {
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(d, d);
    companion.diagonal(-1).setOnes();
    companion.col(d - 1) = -c.head(d) / c(d);
    Eigen::EigenSolver<Eigen::MatrixXd> es(companion, false);
    if (es.info() != Eigen::Success) {
      throw Error(ErrorCode::kDegenerateInput, "companion eigenvalue solver did not converge");
    }
    const auto& ev = es.eigenvalues();
    for (Eigen::Index r = 0; r < ev.size(); ++r) roots.push_back(ev(r));
  }

  const bool any_real = std::any_of(roots.begin(), roots.end(),
                                    [&](const auto& z) { return std::abs(z.imag()) <= tol; });
  if (!any_real) throw Error(ErrorCode::kNoRealRoot, "all roots are complex");
  std::vector<double> out;
  out.reserve(roots.size());
  for (const auto& z : roots) out.push_back(z.real());
  std::sort(out.begin(), out.end());
  return out;
}

Eigen::MatrixXd vandermonde(const std::vector<double>& b, int k) {
  if (k < 1) throw Error(ErrorCode::kInput, "Vandermonde order must be positive");
  Eigen::MatrixXd m(k, static_cast<Eigen::Index>(b.size()));
  for (std::size_t c = 0; c < b.size(); ++c) {
    double pw = 1.0;
    for (int r = 0; r < k; ++r) {
      m(r, static_cast<Eigen::Index>(c)) = pw;
      pw *= b[c];
    }
  }
  return m;
}

Eigen::VectorXd solve_exogenous_cumulants(const std::vector<double>& b, int k,
                                          const Eigen::VectorXd& rhs) {
  if (b.empty()) throw Error(ErrorCode::kInput, "empty root vector");
  if (static_cast<std::size_t>(k) != b.size()) {
    throw Error(ErrorCode::kInput, "Vandermonde system must be square (k = l + 1)");
  }
  if (rhs.size() != k) throw Error(ErrorCode::kInput, "right-hand side must have length k");
  double bmax = 1.0;
  for (double v : b) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kDegenerateInput, "non-finite root");
    bmax = std::max(bmax, std::abs(v));
  }
  const double tie = 1e-4 * bmax;
  for (std::size_t a = 0; a < b.size(); ++a) {
    for (std::size_t c = a + 1; c < b.size(); ++c) {
      if (std::abs(b[a] - b[c]) < tie) {
        throw Error(ErrorCode::kNearSingular, "two roots coincide within tolerance");
      }
    }
  }
  return vandermonde(b, k).partialPivLu().solve(rhs);
}

}  // namespace lvlingam
