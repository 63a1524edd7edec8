#include "lvlingam/synth.hpp"

#include <cmath>

#include <boost/random/beta_distribution.hpp>
#include <boost/random/gamma_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>
#include <json.hpp>

#include "lvlingam/errors.hpp"
#include "lvlingam/rng.hpp"

namespace lvlingam {

std::string_view to_string(NoiseFamily family) {
  switch (family) {
    case NoiseFamily::kGamma: return "gamma";
    case NoiseFamily::kBeta: return "beta";
    case NoiseFamily::kDegenerate: return "degenerate";
  }
  return "unknown";
}

NoiseFamily parse_noise_family(std::string_view name) {
  if (name == "gamma") return NoiseFamily::kGamma;
  if (name == "beta") return NoiseFamily::kBeta;
  throw Error(ErrorCode::kInput, "unknown noise family '" + std::string(name) + "'");
}

double gamma_cumulant(double shape, double scale, int order) {
  if (order < 1) throw Error(ErrorCode::kUnsupportedOrder, "cumulant order must be positive");
  double fact = 1.0;
  for (int r = 2; r < order; ++r) fact *= r;
  return shape * std::pow(scale, order) * fact;
}

double beta_cumulant(double alpha, double beta, int order) {
  if (order < 1 || order > kMaxCumulantOrder) {
    throw Error(ErrorCode::kUnsupportedOrder, "beta cumulants cover orders 1..6");
  }
  std::vector<double> raw(static_cast<std::size_t>(order) + 1, 1.0);
  for (int r = 1; r <= order; ++r) raw[r] = raw[r - 1] * (alpha + r - 1) / (alpha + beta + r - 1);
  std::vector<double> kappa(static_cast<std::size_t>(order) + 1, 0.0);
  for (int n = 1; n <= order; ++n) {
    double v = raw[n];
    double binom = 1.0;  // C(n-1, m-1)
    for (int m = 1; m < n; ++m) {
      v -= binom * kappa[m] * raw[n - m];
      binom = binom * (n - m) / m;
    }
    kappa[n] = v;
  }
  return kappa[order];
}

Eigen::MatrixXd mixing_matrix(const Dag& g, const Eigen::MatrixXd& a) {
  const auto p = static_cast<Eigen::Index>(g.node_count());
  if (a.rows() != p || a.cols() != p) throw Error(ErrorCode::kInput, "weight matrix must be p x p");
  const Eigen::MatrixXd full =
      (Eigen::MatrixXd::Identity(p, p) - a).partialPivLu().solve(Eigen::MatrixXd::Identity(p, p));
  Eigen::MatrixXd out(static_cast<Eigen::Index>(g.observed().size()), p);
  for (NodeId row : g.observed()) {
    for (NodeId col = 0; col < g.node_count(); ++col) {
      out(static_cast<Eigen::Index>(g.observed_index(row)),
          static_cast<Eigen::Index>(g.column_index(col))) =
          full(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
    }
  }
  return out;
}

namespace {

void check_noise(const NoiseSpec& noise, std::size_t p) {
  if (noise.params.size() != p) throw Error(ErrorCode::kInput, "need one noise per node");
  for (const auto& np : noise.params) {
    const bool ok = noise.family == NoiseFamily::kDegenerate ||
                    (std::isfinite(np.first) && std::isfinite(np.second) && np.first > 0.0 &&
                     np.second > 0.0);
    if (!ok) throw Error(ErrorCode::kInput, "noise parameters must be positive");
  }
}

}  // namespace

WeightedModel make_model(const Dag& g, Eigen::MatrixXd a, NoiseSpec noise) {
  const auto p = static_cast<Eigen::Index>(g.node_count());
  if (a.rows() != p || a.cols() != p) throw Error(ErrorCode::kInput, "weight matrix must be p x p");
  for (Eigen::Index j = 0; j < p; ++j) {
    for (Eigen::Index i = 0; i < p; ++i) {
      if (a(j, i) != 0.0 && !g.has_edge(static_cast<NodeId>(i), static_cast<NodeId>(j))) {
        throw Error(ErrorCode::kInput, "nonzero weight on a missing edge");
      }
    }
  }
  check_noise(noise, g.node_count());

  Eigen::MatrixXd bprime = mixing_matrix(g, a);
  Eigen::VectorXd scale = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(g.latent().size()));
  for (std::size_t k = 0; k < g.latent().size(); ++k) {
    const auto col = static_cast<Eigen::Index>(g.column_index(g.latent()[k]));
    for (NodeId v : g.topological_order()) {
      if (!g.is_observed(v)) continue;
      const double entry = bprime(static_cast<Eigen::Index>(g.observed_index(v)), col);
      if (entry != 0.0) {
        scale(static_cast<Eigen::Index>(k)) = entry;
        break;
      }
    }
  }
  return WeightedModel{g, std::move(a), std::move(bprime), std::move(noise), std::move(scale)};
}

WeightedModel draw_model(const Dag& g, NoiseFamily family, std::uint64_t seed) {
  if (!is_canonical(g)) throw Error(ErrorCode::kPrecondition, "graph is not canonical");
  if (family == NoiseFamily::kDegenerate) {
    throw Error(ErrorCode::kInput, "degenerate noise is a test hook, not a drawable family");
  }
  Philox4x32 rng(derive_seed(seed, {0x6d6f64656cull}));
  boost::random::uniform_real_distribution<double> magnitude(0.5, 0.9);
  boost::random::uniform_real_distribution<double> unit(0.0, 1.0);

  const auto p = static_cast<Eigen::Index>(g.node_count());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(p, p);
  for (const Edge& e : g.edges()) {
    const double w = magnitude(rng);
    const double sign = unit(rng) < 0.5 ? -1.0 : 1.0;
    a(static_cast<Eigen::Index>(e.to), static_cast<Eigen::Index>(e.from)) = sign * w;
  }

  NoiseSpec noise{family, std::vector<NoiseParams>(g.node_count())};
  for (auto& np : noise.params) {
    if (family == NoiseFamily::kGamma) {
      np.first = boost::random::uniform_real_distribution<double>(0.1, 1.0)(rng);
      np.second = boost::random::uniform_real_distribution<double>(0.1, 0.5)(rng);
    } else {
      np.first = boost::random::uniform_real_distribution<double>(1.5, 2.0)(rng);
      np.second = boost::random::uniform_real_distribution<double>(2.0, 10.0)(rng);
    }
  }
  return make_model(g, std::move(a), std::move(noise));
}

Eigen::MatrixXd sample_matrix(const WeightedModel& m, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw Error(ErrorCode::kInput, "sample size must be positive");
  const auto p = static_cast<Eigen::Index>(m.noise.params.size());
  const auto rows = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd noise(rows, p);
  const std::uint64_t key = derive_seed(seed, {0x73616d706c65ull});
  for (Eigen::Index c = 0; c < p; ++c) {
    Philox4x32 rng(key, static_cast<std::uint64_t>(c));
    const auto& np = m.noise.params[static_cast<std::size_t>(c)];
    switch (m.noise.family) {
      case NoiseFamily::kGamma: {
        boost::random::gamma_distribution<double> dist(np.first, np.second);
        const double mean = np.first * np.second;
        for (Eigen::Index r = 0; r < rows; ++r) noise(r, c) = dist(rng) - mean;
        break;
      }
      case NoiseFamily::kBeta: {
        boost::random::beta_distribution<double> dist(np.first, np.second);
        const double mean = np.first / (np.first + np.second);
        for (Eigen::Index r = 0; r < rows; ++r) noise(r, c) = dist(rng) - mean;
        break;
      }
      case NoiseFamily::kDegenerate:
        noise.col(c).setZero();
        break;
    }
  }
  return noise * m.bprime.transpose();
}

Sample sample_data(const WeightedModel& m, std::size_t n, std::uint64_t seed) {
  if (n < 2) throw Error(ErrorCode::kInsufficientSample, "a Sample holds at least two rows");
  std::vector<std::string> labels;
  for (NodeId v : m.dag.observed()) labels.push_back(m.dag.name(v));
  return Sample(sample_matrix(m, n, seed), std::move(labels));
}

NoiseCumulants population_noise_cumulants(const WeightedModel& m, int max_order) {
  if (max_order < 2 || max_order > kMaxCumulantOrder) {
    throw Error(ErrorCode::kUnsupportedOrder, "noise cumulants cover orders 2..6");
  }
  const auto p = static_cast<Eigen::Index>(m.noise.params.size());
  Eigen::MatrixXd values(p, max_order - 1);
  for (Eigen::Index j = 0; j < p; ++j) {
    const auto& np = m.noise.params[static_cast<std::size_t>(j)];
    for (int k = 2; k <= max_order; ++k) {
      switch (m.noise.family) {
        case NoiseFamily::kGamma: values(j, k - 2) = gamma_cumulant(np.first, np.second, k); break;
        case NoiseFamily::kBeta: values(j, k - 2) = beta_cumulant(np.first, np.second, k); break;
        case NoiseFamily::kDegenerate:
          throw Error(ErrorCode::kUnsupported, "degenerate noise has no cumulants");
      }
    }
  }
  return NoiseCumulants(std::move(values), max_order);
}

double WeightedModel::total_effect(NodeId cause, NodeId effect) const {
  return bprime(static_cast<Eigen::Index>(dag.observed_index(effect)),
                static_cast<Eigen::Index>(dag.column_index(cause)));
}

std::map<std::pair<NodeId, NodeId>, double> WeightedModel::true_effects() const {
  std::map<std::pair<NodeId, NodeId>, double> out;
  for (NodeId effect : dag.observed()) {
    for (NodeId cause = 0; cause < dag.node_count(); ++cause) {
      if (cause == effect) continue;
      const double v = total_effect(cause, effect);
      if (v != 0.0) out[{cause, effect}] = v;
    }
  }
  return out;
}

Eigen::MatrixXd WeightedModel::scaled_bprime() const {
  Eigen::MatrixXd out = bprime;
  for (std::size_t k = 0; k < dag.latent().size(); ++k) {
    out.col(static_cast<Eigen::Index>(dag.column_index(dag.latent()[k]))) /=
        latent_scale(static_cast<Eigen::Index>(k));
  }
  return out;
}

NoiseCumulants WeightedModel::scaled_noise_cumulants(int max_order) const {
  Eigen::MatrixXd values = population_noise_cumulants(*this, max_order).values();
  for (std::size_t k = 0; k < dag.latent().size(); ++k) {
    const auto row = static_cast<Eigen::Index>(dag.column_index(dag.latent()[k]));
    const double s = latent_scale(static_cast<Eigen::Index>(k));
    for (int order = 2; order <= max_order; ++order) values(row, order - 2) *= std::pow(s, order);
  }
  return NoiseCumulants(std::move(values), max_order);
}

std::string WeightedModel::to_json() const {
  nlohmann::json doc;
  doc["graph"] = nlohmann::json::parse(dag.to_json());
  auto weights = nlohmann::json::array();
  for (const Edge& e : dag.edges()) {
    weights.push_back({{"from", dag.name(e.from)},
                       {"to", dag.name(e.to)},
                       {"weight", a(static_cast<Eigen::Index>(e.to), static_cast<Eigen::Index>(e.from))}});
  }
  doc["weights"] = std::move(weights);
  nlohmann::json noise_doc;
  noise_doc["family"] = std::string(to_string(noise.family));
  auto params = nlohmann::json::array();
  for (NodeId v = 0; v < dag.node_count(); ++v) {
    const auto& np = noise.params[dag.column_index(v)];
    nlohmann::json entry{{"node", dag.name(v)}};
    if (noise.family == NoiseFamily::kBeta) {
      entry["alpha"] = np.first;
      entry["beta"] = np.second;
    } else {
      entry["shape"] = np.first;
      entry["scale"] = np.second;
    }
    params.push_back(std::move(entry));
  }
  noise_doc["parameters"] = std::move(params);
  doc["noise"] = std::move(noise_doc);
  auto effects = nlohmann::json::array();
  for (const auto& [key, value] : true_effects()) {
    effects.push_back({{"cause", dag.name(key.first)}, {"effect", dag.name(key.second)}, {"value", value}});
  }
  doc["true_effects"] = std::move(effects);
  return doc.dump(2);
}

}  // namespace lvlingam
