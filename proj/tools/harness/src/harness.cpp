#include "lvlingam/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "lvlingam/errors.hpp"
#include "lvlingam/rng.hpp"
#include "lvlingam/rootfind.hpp"

namespace lvlingam {

double relative_error(double estimate, double truth) {
  if (!(std::abs(truth) >= 1e-12)) {
    throw Error(ErrorCode::kUndefinedMetric, "relative error is undefined for a zero true effect");
  }
  return std::abs((estimate - truth) / truth);
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::kInput, "quantile level must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = static_cast<double>(values.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= values.size()) return values.back();
  return values[lo] + (h - static_cast<double>(lo)) * (values[lo + 1] - values[lo]);
}

Problem problem_from_preset(const std::string& name) {
  PresetInfo info = preset(name);
  return Problem{info.name,
                 std::move(info.dag),
                 info.proxy,
                 info.iv,
                 info.effects_of_interest,
                 static_cast<int>(info.latent_count)};
}

namespace {

NodeId observed_node(const Dag& dag, const std::string& name) {
  const NodeId v = dag.find(name);
  if (!dag.is_observed(v)) throw Error(ErrorCode::kInput, "role " + name + " must be an observed node");
  return v;
}

bool edge_estimator(Estimator e) {
  return e == Estimator::kProxyEdge || e == Estimator::kProxyEdge1Lat ||
         e == Estimator::kProxyEdge1LatRefined;
}

std::string effect_label(const Dag& dag, const std::pair<NodeId, NodeId>& e) {
  return dag.name(e.first) + "->" + dag.name(e.second);
}

}  // namespace

Problem problem_from_graph(const std::string& name, const Dag& dag, Estimator estimator,
                           const std::vector<std::string>& roles) {
  if (is_proxy_estimator(estimator)) {
    if (roles.size() != 3) throw Error(ErrorCode::kInput, "proxy estimators need roles Z,T,Y");
    const NodeId z = observed_node(dag, roles[0]);
    const NodeId t = observed_node(dag, roles[1]);
    const NodeId y = observed_node(dag, roles[2]);
    if (z == t || t == y || z == y) throw Error(ErrorCode::kInput, "Z, T and Y must be distinct");
    return Problem{name, dag, ProxyRoles{z, t, y}, std::nullopt, {{t, y}},
                   iv_latent_count(dag, t, y)};
  }
  if (roles.size() < 3) {
    throw Error(ErrorCode::kInput, "IV estimators need roles I,...,T,...,Y");
  }
  std::vector<NodeId> listed;
  for (const auto& r : roles) listed.push_back(observed_node(dag, r));
  const NodeId y = listed.back();
  listed.pop_back();
  IvRoles iv{{}, {}, y};
  for (NodeId v : listed) {
    const NodeSet an = ancestors(dag, v);
    const bool has_listed_ancestor =
        std::any_of(listed.begin(), listed.end(), [&](NodeId u) { return an.contains(u); });
    (has_listed_ancestor ? iv.treatments : iv.instruments).push_back(v);
  }
  if (iv.treatments.empty()) throw Error(ErrorCode::kInput, "no treatment among the roles");
  Problem p{name, dag, std::nullopt, iv, {}, 0};
  for (NodeId t : iv.treatments) {
    p.effects.emplace_back(t, y);
    p.latent_count = std::max(p.latent_count, iv_latent_count(dag, t, y));
  }
  return p;
}

Problem implied_problem(const std::vector<std::string>& columns, Estimator estimator, int latents) {
  if (latents < 0) throw Error(ErrorCode::kInput, "latent count must be non-negative");
  const auto l = static_cast<std::size_t>(latents);
  std::vector<std::string> names = columns;
  std::vector<NodeId> observed, latent;
  std::vector<Edge> edges;
  const std::size_t p = columns.size();
  for (NodeId v = 0; v < p; ++v) observed.push_back(v);
  for (std::size_t k = 0; k < l; ++k) {
    latent.push_back(p + k);
    names.push_back("L" + std::to_string(k + 1));
  }
  if (is_proxy_estimator(estimator)) {
    if (p != 3) throw Error(ErrorCode::kInput, "proxy estimators need columns Z,T,Y");
    edges.push_back({1, 2});
    if (edge_estimator(estimator)) edges.push_back({0, 1});
    for (NodeId lv : latent) {
      for (NodeId v = 0; v < 3; ++v) edges.push_back({lv, v});
    }
  } else {
    if (p < 3) throw Error(ErrorCode::kInput, "IV estimators need columns I,T1,...,Y");
    const NodeId y = p - 1;
    for (NodeId t = 1; t < y; ++t) {
      edges.push_back({0, t});
      edges.push_back({t, y});
      for (NodeId lv : latent) edges.push_back({lv, t});
    }
    for (NodeId lv : latent) edges.push_back({lv, y});
  }
  Dag dag(p + l, std::move(edges), std::move(observed), std::move(latent), std::move(names));
  return problem_from_graph("csv", dag, estimator, columns);
}

Estimator default_estimator(const std::string& preset_name) {
  if (preset_name == "G1" || preset_name == "G2") return Estimator::kProxyNoEdge;
  if (preset_name == "G3") return Estimator::kProxyEdge1LatRefined;
  if (preset_name == "PROXY_2LAT_EDGE") return Estimator::kProxyEdge;
  if (preset_name == "IV_2T_1I") return Estimator::kIv;
  if (preset_name == "IV_3T_2I") return Estimator::kIvMulti;
  throw Error(ErrorCode::kInput, "unknown preset '" + preset_name + "'");
}

namespace {

void check_compatible(const Problem& problem, Estimator estimator, std::optional<int> latents) {
  if (is_proxy_estimator(estimator) && !problem.proxy) {
    throw Error(ErrorCode::kInput, std::string(to_string(estimator)) + " needs a proxy triple Z,T,Y");
  }
  if (!is_proxy_estimator(estimator) && !problem.iv) {
    throw Error(ErrorCode::kInput, std::string(to_string(estimator)) + " needs an instrument layout");
  }
  if (estimator == Estimator::kIv && problem.iv->instruments.size() != 1) {
    throw Error(ErrorCode::kInput, "iv takes exactly one instrument; use iv_multi");
  }
  if (latents && (*latents < 0 || *latents > problem.latent_count)) {
    throw Error(ErrorCode::kInput, "latent override must lie in [0, " +
                                       std::to_string(problem.latent_count) + "]");
  }
}

}  // namespace

EstimateOutcome run_estimator(const CumulantSource& src, const Problem& problem,
                              Estimator estimator, std::optional<int> latents) {
  check_compatible(problem, estimator, latents);
  const Dag& g = problem.dag;
  if (src.dim() != g.observed().size()) {
    throw Error(ErrorCode::kInput, "source columns must match the observed nodes of the graph");
  }
  if (is_proxy_estimator(estimator)) {
    const ProxyRoles& r = *problem.proxy;
    const auto sub = src.select(
        {g.observed_index(r.proxy), g.observed_index(r.treatment), g.observed_index(r.outcome)});
    const int l = latents.value_or(problem.latent_count);
    ProxyEstimate est;
    switch (estimator) {
      case Estimator::kProxyNoEdge: est = estimate_proxy_no_edge(*sub, l); break;
      case Estimator::kProxyEdge: est = estimate_proxy_edge(*sub, l); break;
      case Estimator::kProxyEdge1Lat:
      case Estimator::kProxyEdge1LatRefined:
        if (l != 1) {
          throw Error(ErrorCode::kUnsupported, std::string(to_string(estimator)) +
                                                   " assumes exactly one latent confounder");
        }
        est = estimator == Estimator::kProxyEdge1Lat ? estimate_proxy_edge_1lat(*sub)
                                                     : estimate_proxy_edge_1lat_refined(*sub);
        break;
      default: break;
    }
    return EstimateOutcome{{est.effect}, std::move(est)};
  }
  const IvRoles& r = *problem.iv;
  IvEstimate est = estimator == Estimator::kIv
                       ? estimate_iv(src, g, r.instruments[0], r.treatments, r.outcome, latents)
                       : estimate_iv_multi(src, g, r.instruments, r.treatments, r.outcome, latents);
  EstimateOutcome out{{}, {}};
  for (const auto& [cause, outcome] : problem.effects) {
    const auto it = std::find(r.treatments.begin(), r.treatments.end(), cause);
    if (it == r.treatments.end() || outcome != r.outcome) {
      throw Error(ErrorCode::kInput, "effect " + effect_label(g, {cause, outcome}) +
                                         " is not a treatment effect on the outcome");
    }
    out.effects.push_back(est.effects(it - r.treatments.begin()));
  }
  out.detail = std::move(est);
  return out;
}

namespace {

nlohmann::json to_array(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

}  // namespace

std::string to_json(const EstimateOutcome& outcome, const Problem& problem, Estimator estimator) {
  nlohmann::json doc;
  doc["estimator"] = std::string(to_string(estimator));
  auto effects = nlohmann::json::array();
  for (std::size_t k = 0; k < problem.effects.size(); ++k) {
    effects.push_back({{"effect", effect_label(problem.dag, problem.effects[k])},
                       {"value", outcome.effects[k]}});
  }
  doc["effects"] = std::move(effects);
  nlohmann::json diag;
  if (const auto* p = std::get_if<ProxyEstimate>(&outcome.detail)) {
    diag["sigma"] = p->sigma;
    diag["eta"] = p->eta;
    diag["residual"] = p->residual;
    diag["roots_zt"] = p->roots_zt;
    diag["roots_zy"] = p->roots_zy;
    diag["roots_ty"] = p->roots_ty;
    diag["fallback"] = p->fallback;
    if (!p->warning.empty()) diag["warning"] = p->warning;
  } else {
    const auto& iv = std::get<IvEstimate>(outcome.detail);
    diag["selected"] = to_array(iv.selected);
    diag["residual"] = iv.residual;
    diag["projection_distance"] = iv.projection_distance;
    diag["roots"] = iv.roots;
    diag["latent_counts"] = iv.latent_counts;
    diag["offsets"] = to_array(iv.offsets);
  }
  doc["diagnostics"] = std::move(diag);
  return doc.dump(2);
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.preset.has_value() == cfg.graph_file.has_value()) {
    throw Error(ErrorCode::kInput, "give exactly one of a preset or a graph file");
  }
  if (cfg.graph_file && !cfg.estimator) {
    throw Error(ErrorCode::kInput, "a graph file needs an explicit estimator");
  }
  if (cfg.replicates < 1) throw Error(ErrorCode::kInput, "replicates must be at least 1");
  if (cfg.sizes.empty()) throw Error(ErrorCode::kInput, "at least one sample size is required");
  for (std::size_t k = 0; k < cfg.sizes.size(); ++k) {
    if (!cfg.population && cfg.sizes[k] < 2) {
      throw Error(ErrorCode::kInput, "sample sizes must be at least 2");
    }
    if (k > 0 && cfg.sizes[k] <= cfg.sizes[k - 1]) {
      throw Error(ErrorCode::kInput, "sample sizes must be strictly increasing");
    }
  }
  if (cfg.noise == NoiseFamily::kDegenerate) {
    throw Error(ErrorCode::kInput, "experiments need a gamma or beta noise family");
  }
}

double SummaryRow::failure_rate() const {
  return replicates == 0 ? 0.0 : static_cast<double>(failures) / static_cast<double>(replicates);
}

std::uint64_t replicate_seed(std::uint64_t base, std::size_t n, std::size_t rep) {
  return derive_seed(base, {static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(rep)});
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  const Estimator estimator = cfg.estimator.value_or(default_estimator(cfg.preset.value_or("")));
  Problem problem = [&] {
    if (cfg.preset) {
      Problem p = problem_from_preset(*cfg.preset);
      if (cfg.roles.empty()) return p;
      return problem_from_graph(p.name, p.dag, estimator, cfg.roles);
    }
    return problem_from_graph(*cfg.graph_file, Dag::from_json_file(*cfg.graph_file), estimator,
                              cfg.roles);
  }();
  check_compatible(problem, estimator, cfg.latents);
  if (!is_canonical(problem.dag)) {
    throw Error(ErrorCode::kInput, "experiments need a canonical graph");
  }

  ExperimentResult result;
  result.graph = problem.name;
  result.estimator = estimator;
  for (const auto& e : problem.effects) result.effect_labels.push_back(effect_label(problem.dag, e));

  for (std::size_t n : cfg.sizes) {
    for (std::size_t rep = 0; rep < cfg.replicates; ++rep) {
      ReplicateRow row;
      row.n = n;
      row.replicate = rep;
      row.seed = replicate_seed(cfg.seed, n, rep);
      const WeightedModel model = draw_model(problem.dag, cfg.noise, derive_seed(row.seed, {0}));
      for (const auto& [cause, outcome] : problem.effects) {
        row.truth.push_back(model.total_effect(cause, outcome));
      }
      try {
        std::shared_ptr<const CumulantSource> src;
        if (cfg.population) {
          const int order = required_order(kMaxLatents);
          src = make_population_source(model.scaled_bprime(), model.scaled_noise_cumulants(order));
        } else {
          src = make_sample_source(sample_data(model, n, derive_seed(row.seed, {1})));
        }
        const EstimateOutcome est = run_estimator(*src, problem, estimator, cfg.latents);
        double total = 0.0;
        for (std::size_t k = 0; k < row.truth.size(); ++k) {
          row.error.push_back(relative_error(est.effects[k], row.truth[k]));
          total += row.error.back();
        }
        row.estimate = est.effects;
        row.metric = total / static_cast<double>(row.error.size());
      } catch (const Error& e) {
        row.failed = true;
        row.failure = std::string(to_string(e.code()));
        row.estimate.clear();
        row.error.clear();
        row.metric = std::numeric_limits<double>::quiet_NaN();
      }
      result.rows.push_back(std::move(row));
    }
  }
  result.summary = summarize(result.rows);
  return result;
}

std::vector<SummaryRow> summarize(const std::vector<ReplicateRow>& rows) {
  std::vector<SummaryRow> out;
  std::vector<std::vector<double>> metrics;
  for (const ReplicateRow& r : rows) {
    if (out.empty() || out.back().n != r.n) {
      const auto it = std::find_if(out.begin(), out.end(), [&](const SummaryRow& s) { return s.n == r.n; });
      if (it != out.end()) throw Error(ErrorCode::kInput, "rows must be grouped by sample size");
      out.push_back(SummaryRow{r.n});
      metrics.emplace_back();
    }
    ++out.back().replicates;
    if (r.failed) {
      ++out.back().failures;
    } else {
      metrics.back().push_back(r.metric);
    }
  }
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k].median = quantile(metrics[k], 0.5);
    out[k].q25 = quantile(metrics[k], 0.25);
    out[k].q75 = quantile(metrics[k], 0.75);
  }
  return out;
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

void write_results_csv(std::ostream& out, const ExperimentResult& result) {
  out << "graph,estimator,n,replicate,seed";
  for (const char* prefix : {"truth_", "estimate_", "error_"}) {
    for (const auto& label : result.effect_labels) out << ',' << prefix << label;
  }
  out << ",metric,failed,failure\n";
  const std::size_t k = result.effect_labels.size();
  for (const ReplicateRow& r : result.rows) {
    out << result.graph << ',' << to_string(result.estimator) << ',' << r.n << ',' << r.replicate
        << ',' << r.seed;
    for (std::size_t j = 0; j < k; ++j) out << ',' << format_double(r.truth[j]);
    for (std::size_t j = 0; j < k; ++j) out << ',' << (r.failed ? "" : format_double(r.estimate[j]));
    for (std::size_t j = 0; j < k; ++j) out << ',' << (r.failed ? "" : format_double(r.error[j]));
    out << ',' << (r.failed ? "" : format_double(r.metric)) << ',' << (r.failed ? 1 : 0) << ','
        << r.failure << '\n';
  }
}

void write_summary_csv(std::ostream& out, const ExperimentResult& result) {
  out << "graph,estimator,n,replicates,failures,failure_rate,median,q25,q75\n";
  for (const SummaryRow& s : result.summary) {
    out << result.graph << ',' << to_string(result.estimator) << ',' << s.n << ',' << s.replicates
        << ',' << s.failures << ',' << format_double(s.failure_rate()) << ','
        << format_double(s.median) << ',' << format_double(s.q25) << ',' << format_double(s.q75)
        << '\n';
  }
}

void write_plot_csv(std::ostream& out, const ExperimentResult& result) {
  out << "n,median,q25,q75\n";
  for (const SummaryRow& s : result.summary) {
    out << s.n << ',' << format_double(s.median) << ',' << format_double(s.q25) << ','
        << format_double(s.q75) << '\n';
  }
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\"");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\"");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

Sample read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::kInput, "CSV input is empty");
  if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
  const std::vector<std::string> header = split(line);
  std::vector<double> values;
  std::size_t rows = 0, lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto fields = split(line);
    if (fields.size() != header.size()) {
      throw Error(ErrorCode::kInput, "CSV line " + std::to_string(lineno) + " has " +
                                         std::to_string(fields.size()) + " fields, expected " +
                                         std::to_string(header.size()));
    }
    for (const auto& f : fields) {
      double v = 0.0;
      const auto res = std::from_chars(f.data(), f.data() + f.size(), v);
      if (res.ec != std::errc() || res.ptr != f.data() + f.size()) {
        throw Error(ErrorCode::kInput, "CSV line " + std::to_string(lineno) + ": '" + f +
                                           "' is not a number");
      }
      values.push_back(v);
    }
    ++rows;
  }
  Eigen::MatrixXd data(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(header.size()));
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < header.size(); ++c) {
      data(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = values[r * header.size() + c];
    }
  }
  return Sample(std::move(data), header);
}

Sample read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kInput, "cannot open " + path);
  return read_csv(in);
}

void write_csv(std::ostream& out, const Eigen::MatrixXd& data, const std::vector<std::string>& labels) {
  if (static_cast<Eigen::Index>(labels.size()) != data.cols()) {
    throw Error(ErrorCode::kInput, "label count does not match the column count");
  }
  for (std::size_t c = 0; c < labels.size(); ++c) out << (c ? "," : "") << labels[c];
  out << '\n';
  for (Eigen::Index r = 0; r < data.rows(); ++r) {
    for (Eigen::Index c = 0; c < data.cols(); ++c) out << (c ? "," : "") << format_double(data(r, c));
    out << '\n';
  }
}

namespace {

std::size_t column_of(const Sample& s, const std::string& name) {
  const auto it = std::find(s.labels.begin(), s.labels.end(), name);
  if (it == s.labels.end()) throw Error(ErrorCode::kInput, "no column named '" + name + "'");
  return static_cast<std::size_t>(it - s.labels.begin());
}

}  // namespace

Sample select_columns(const Sample& s, const std::vector<std::string>& names) {
  Eigen::MatrixXd data(s.rows(), static_cast<Eigen::Index>(names.size()));
  for (std::size_t k = 0; k < names.size(); ++k) {
    data.col(static_cast<Eigen::Index>(k)) = s.data.col(static_cast<Eigen::Index>(column_of(s, names[k])));
  }
  return Sample(std::move(data), names);
}

Sample residualize_covariates(const Sample& s, const std::vector<std::string>& covariates,
                              const std::vector<std::string>& targets) {
  if (targets.empty()) throw Error(ErrorCode::kInput, "no target columns");
  const auto n = s.rows();
  const auto m = static_cast<Eigen::Index>(covariates.size());
  Eigen::MatrixXd x(n, m + 1);
  x.col(0).setOnes();
  for (Eigen::Index k = 0; k < m; ++k) {
    x.col(k + 1) = s.data.col(static_cast<Eigen::Index>(column_of(s, covariates[k])));
  }
  const Sample y = select_columns(s, targets);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x.rows(), x.cols());
  qr.setThreshold(1e-10);
  qr.compute(x);
  if (qr.rank() < m + 1) {
    std::string dependent;
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index k = qr.rank(); k < m + 1; ++k) {
      const Eigen::Index c = perm(k);
      if (!dependent.empty()) dependent += ", ";
      dependent += c == 0 ? std::string("intercept") : covariates[c - 1];
    }
    throw Error(ErrorCode::kRankDeficient, "covariates are linearly dependent: " + dependent);
  }
  Eigen::MatrixXd resid = y.data - x * qr.solve(y.data);
  return Sample(std::move(resid), targets);
}

}  // namespace lvlingam
