#include "lvlingam/proxy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

#include "lvlingam/errors.hpp"

namespace lvlingam {

namespace {

constexpr std::size_t kZ = 0, kT = 1, kY = 2;

void check_source(const CumulantSource& src, int l) {
  if (src.dim() != 3) throw Error(ErrorCode::kInput, "proxy estimators need columns [Z, T, Y]");
  if (l < 1 || l > kMaxLatents) {
    throw Error(ErrorCode::kUnsupported, "proxy estimators support l in {1, 2}");
  }
  if (src.max_order() < required_order(l)) {
    throw Error(ErrorCode::kUnsupportedOrder,
                "need cumulants up to order " + std::to_string(required_order(l)));
  }
}

Eigen::VectorXd as_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

double inf_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

/// Roots of the (Z, T) and (Z, Y) pairs with their exogenous cumulants aligned.
struct AlignedRoots {
  std::vector<double> zt;
  std::vector<double> zy;
  std::vector<std::size_t> sigma;
};

/// With `pin_zero`, slot 0 of both root vectors is the prepended zero root of
/// the proxy's own noise and is kept aligned; the other slots are matched.
AlignedRoots align(const CumulantSource& src, std::vector<double> zt, std::vector<double> zy,
                   int l, bool pin_zero = false) {
  const int k = l + 1;
  const Eigen::VectorXd c_t = solve_exogenous_cumulants(zt, k, bivariate_cumulant_vector(src, kZ, kT, k));
  const Eigen::VectorXd c_y = solve_exogenous_cumulants(zy, k, bivariate_cumulant_vector(src, kZ, kY, k));
  std::vector<std::size_t> sigma;
  if (pin_zero) {
    sigma.push_back(0);
    for (std::size_t s : match_permutation(c_t.tail(l), c_y.tail(l))) sigma.push_back(s + 1);
  } else {
    sigma = match_permutation(c_t, c_y);
  }
  return AlignedRoots{std::move(zt), std::move(zy), std::move(sigma)};
}

}  // namespace

std::vector<std::size_t> match_permutation(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                                           std::optional<std::size_t> free_slot) {
  if (a.size() != b.size()) throw Error(ErrorCode::kInput, "permutation match needs equal lengths");
  if (a.size() < 1 || a.size() > 3) throw Error(ErrorCode::kInput, "permutation match supports m in 1..3");
  std::vector<std::size_t> perm(static_cast<std::size_t>(a.size()));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::size_t> best = perm;
  double best_cost = std::numeric_limits<double>::infinity();
  do {
    double cost = 0.0;
    for (std::size_t i = 0; i < perm.size(); ++i) {
      if (free_slot && *free_slot == i) continue;
      const double d = a(static_cast<Eigen::Index>(i)) - b(static_cast<Eigen::Index>(perm[i]));
      cost += d * d;
    }
    if (cost < best_cost) {
      best_cost = cost;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

ProxyEstimate estimate_proxy_no_edge(const CumulantSource& src, int l, const ProxyOptions& opts) {
  check_source(src, l);
  std::vector<double> zt{0.0};
  std::vector<double> zy{0.0};
  for (double r : real_roots(build_deflated_polynomial(src, kZ, kT, l, opts.minor_rule))) zt.push_back(r);
  for (double r : real_roots(build_deflated_polynomial(src, kZ, kY, l, opts.minor_rule))) zy.push_back(r);
  const std::vector<double> ty = real_roots(build_effect_polynomial(src, kT, kY, l, opts.minor_rule));

  AlignedRoots aligned = align(src, std::move(zt), std::move(zy), l, true);
  const double scale = std::max({1.0, inf_norm(aligned.zt), inf_norm(aligned.zy)});
  const double eps = 1e-9 * scale;
  Eigen::VectorXd ratio(l + 1);
  for (int i = 0; i <= l; ++i) {
    const double num = aligned.zy[aligned.sigma[static_cast<std::size_t>(i)]];
    const double den = aligned.zt[static_cast<std::size_t>(i)];
    if (std::abs(den) < eps) {
      if (std::abs(num) >= eps) {
        throw Error(ErrorCode::kDegenerateRatio, "nonzero effect ratio over a vanishing root");
      }
      ratio(i) = 0.0;
    } else {
      ratio(i) = num / den;
    }
  }
  // The zero ratio stands for the treatment's own noise; it is matched last.
  const auto eta = match_permutation(ratio, as_vector(ty), 0);

  ProxyEstimate est;
  est.effect = ty[eta[0]];  // slot 0 holds the prepended zero root
  est.sigma = std::move(aligned.sigma);
  est.eta = eta;
  est.roots_zt = std::move(aligned.zt);
  est.roots_zy = std::move(aligned.zy);
  est.roots_ty = ty;
  return est;
}

ProxyEstimate estimate_proxy_edge(const CumulantSource& src, int l, const ProxyOptions& opts) {
  check_source(src, l);
  std::vector<double> zt = real_roots(build_effect_polynomial(src, kZ, kT, l, opts.minor_rule));
  std::vector<double> zy = real_roots(build_effect_polynomial(src, kZ, kY, l, opts.minor_rule));
  AlignedRoots aligned = align(src, std::move(zt), std::move(zy), l);

  std::optional<ProxyEstimate> best;
  std::string last_error;
  for (int i = 0; i <= l; ++i) {
    const double b1 = aligned.zt[static_cast<std::size_t>(i)];
    const double b2 = aligned.zy[aligned.sigma[static_cast<std::size_t>(i)]];
    Eigen::Matrix3d w;
    w << 1.0, 0.0, 0.0, -b1, 1.0, 0.0, -b2, 0.0, 1.0;
    try {
      ProxyEstimate inner = estimate_proxy_no_edge(*src.linear_map(w), l, opts);
      const double r = std::abs(b2 - inner.effect * b1);
      if (!std::isfinite(r)) continue;
      if (!best || r < best->residual) {
        inner.residual = r;
        best = std::move(inner);
      }
    } catch (const Error& e) {
      if (!is_estimation_failure(e.code())) throw;
      last_error = e.what();
    }
  }
  if (!best) {
    throw Error(ErrorCode::kNoValidCandidate,
                "every residualized candidate failed" + (last_error.empty() ? "" : " (" + last_error + ")"));
  }
  best->sigma = aligned.sigma;
  best->roots_zt = aligned.zt;
  best->roots_zy = aligned.zy;
  return *best;
}

double q_ratio(const CumulantSource& src, double b) {
  const double num = src.cumulant({kT, kY}) - b * src.cumulant({kZ, kY});
  const double tt = src.cumulant({kT, kT});
  const double zt = b * src.cumulant({kZ, kT});
  const double den = tt - zt;
  if (!(std::abs(den) > 1e-12 * std::max(std::abs(tt), std::abs(zt)))) {
    throw Error(ErrorCode::kDegenerateRatio, "q-ratio denominator vanishes");
  }
  return num / den;
}

ProxyEstimate estimate_proxy_edge_1lat(const CumulantSource& src) {
  check_source(src, 1);
  std::vector<double> zt = real_roots(build_effect_polynomial(src, kZ, kT, 1));
  std::vector<double> zy = real_roots(build_effect_polynomial(src, kZ, kY, 1));
  AlignedRoots aligned = align(src, std::move(zt), std::move(zy), 1);

  // Candidate i takes q at the other slot's root and is scored on slot i.
  std::optional<double> best_effect;
  double best_r = std::numeric_limits<double>::infinity();
  std::optional<Error> failure;
  for (std::size_t i = 0; i < 2; ++i) {
    const std::size_t other = 1 - i;
    try {
      const double cand = q_ratio(src, aligned.zt[other]);
      const double r = std::abs(aligned.zy[aligned.sigma[i]] - cand * aligned.zt[i]);
      if (std::isfinite(r) && r < best_r) {
        best_r = r;
        best_effect = cand;
      }
    } catch (const Error& e) {
      if (!is_estimation_failure(e.code())) throw;
      failure = e;
    }
  }
  if (!best_effect) {
    if (failure) throw *failure;
    throw Error(ErrorCode::kNoValidCandidate, "no finite q-ratio candidate");
  }
  ProxyEstimate est;
  est.effect = *best_effect;
  est.residual = best_r;
  est.sigma = std::move(aligned.sigma);
  est.roots_zt = std::move(aligned.zt);
  est.roots_zy = std::move(aligned.zy);
  return est;
}

double refinement_g(const CumulantSource& src, double b) {
  // Indices 1, 2, 3 are Z, T and Y - bT; expand each cumulant multilinearly.
  const auto c = [&](std::initializer_list<std::size_t> idx) { return src.cumulant(idx); };
  const double c133 = c({kZ, kY, kY}) - 2.0 * b * c({kZ, kT, kY}) + b * b * c({kZ, kT, kT});
  const double c223 = c({kT, kT, kY}) - b * c({kT, kT, kT});
  const double c113 = c({kZ, kZ, kY}) - b * c({kZ, kZ, kT});
  const double c233 = c({kT, kY, kY}) - 2.0 * b * c({kT, kT, kY}) + b * b * c({kT, kT, kT});
  return c133 * c223 / (c113 * c233);
}

double refinement_objective(const CumulantSource& src, double b, double b_hat) {
  double q;
  try {
    q = q_ratio(src, refinement_g(src, b));
  } catch (const Error&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  const double t1 = b - q;
  const double t2 = b - b_hat;
  return t1 * t1 + t2 * t2;
}

ProxyEstimate estimate_proxy_edge_1lat_refined(const CumulantSource& src) {
  ProxyEstimate est = estimate_proxy_edge_1lat(src);
  const double b_hat = est.effect;
  const auto h = [&](double b) { return refinement_objective(src, b, b_hat); };
  const auto grad = [&](double b) {
    const double step = 1e-6 * std::max(1.0, std::abs(b));
    return (h(b + step) - h(b - step)) / (2.0 * step);
  };
  const auto fall_back = [&](const char* why) {
    est.effect = b_hat;
    est.fallback = true;
    est.warning = why;
    return est;
  };

  double b = b_hat;
  double f = h(b);
  if (!std::isfinite(f)) return fall_back("non-finite objective at the initial point");
  double g = grad(b);
  double inv_hess = 1.0;
  for (int it = 0; it < 200; ++it) {
    if (!std::isfinite(g)) return fall_back("non-finite gradient");
    if (g == 0.0) break;
    double dir = -inv_hess * g;
    if (dir * g >= 0.0) {
      inv_hess = 1.0;
      dir = -g;
    }
    double t = 1.0;
    double b_new = b;
    double f_new = f;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      b_new = b + t * dir;
      f_new = h(b_new);
      if (!std::isfinite(f_new)) return fall_back("non-finite objective along the search");
      if (f_new <= f + 1e-4 * t * dir * g) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;
    const double g_new = grad(b_new);
    const double s = b_new - b;
    const double y = g_new - g;
    if (s * y > 0.0) inv_hess = s / y;
    b = b_new;
    f = f_new;
    g = g_new;
    if (std::abs(s) < 1e-9) break;
  }
  est.effect = b;
  return est;
}

std::string_view to_string(Estimator e) {
  switch (e) {
    case Estimator::kProxyNoEdge: return "proxy_no_edge";
    case Estimator::kProxyEdge: return "proxy_edge";
    case Estimator::kProxyEdge1Lat: return "proxy_edge_1lat";
    case Estimator::kProxyEdge1LatRefined: return "proxy_edge_1lat_refined";
    case Estimator::kIv: return "iv";
    case Estimator::kIvMulti: return "iv_multi";
  }
  return "unknown";
}

Estimator parse_estimator(std::string_view name) {
  for (Estimator e : {Estimator::kProxyNoEdge, Estimator::kProxyEdge, Estimator::kProxyEdge1Lat,
                      Estimator::kProxyEdge1LatRefined, Estimator::kIv, Estimator::kIvMulti}) {
    if (to_string(e) == name) return e;
  }
  throw Error(ErrorCode::kInput, "unknown estimator '" + std::string(name) + "'");
}

bool is_proxy_estimator(Estimator e) { return e != Estimator::kIv && e != Estimator::kIvMulti; }

}  // namespace lvlingam
