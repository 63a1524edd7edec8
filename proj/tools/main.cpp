#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lvlingam/errors.hpp"
#include "lvlingam/harness.hpp"
#include "lvlingam/rng.hpp"

namespace fs = std::filesystem;
using namespace lvlingam;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitEstimation = 3;

struct Shared {
  std::string preset;
  std::string graph_file;
  std::string noise = "gamma";
  std::uint64_t seed = 1;
  std::string out;
};

void add_graph_flags(CLI::App* cmd, Shared& s) {
  auto* p = cmd->add_option("--preset", s.preset, "Built-in graph")
                ->check(CLI::IsMember(preset_names()));
  auto* g = cmd->add_option("--graph-file", s.graph_file, "Graph JSON file")->check(CLI::ExistingFile);
  p->excludes(g);
}

void add_model_flags(CLI::App* cmd, Shared& s) {
  cmd->add_option("--noise", s.noise, "Noise family")
      ->check(CLI::IsMember({"gamma", "beta"}))
      ->capture_default_str();
  cmd->add_option("--seed", s.seed, "Base seed")->capture_default_str();
}

Problem load_problem(const Shared& s, Estimator estimator, const std::vector<std::string>& roles) {
  if (!s.preset.empty()) {
    Problem p = problem_from_preset(s.preset);
    if (roles.empty()) return p;
    return problem_from_graph(p.name, p.dag, estimator, roles);
  }
  return problem_from_graph(s.graph_file, Dag::from_json_file(s.graph_file), estimator, roles);
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kInput, "cannot write " + path.string());
  return out;
}

int cmd_generate(const Shared& s, std::size_t n) {
  const Dag dag = s.preset.empty() ? Dag::from_json_file(s.graph_file) : preset(s.preset).dag;
  const WeightedModel model = draw_model(dag, parse_noise_family(s.noise), derive_seed(s.seed, {0}));
  const Eigen::MatrixXd data = sample_matrix(model, n, derive_seed(s.seed, {1}));
  std::vector<std::string> labels;
  for (NodeId v : dag.observed()) labels.push_back(dag.name(v));
  const fs::path csv = s.out;
  {
    auto out = open_out(csv);
    write_csv(out, data, labels);
  }
  fs::path sidecar = csv;
  sidecar.replace_extension(".json");
  auto out = open_out(sidecar);
  out << model.to_json() << '\n';
  return 0;
}

int cmd_estimate(const Shared& s, const std::string& input, const std::string& estimator_name,
                 const std::vector<std::string>& columns, std::optional<int> latents) {
  const Estimator estimator = parse_estimator(estimator_name);
  const Sample raw = read_csv_file(input);
  Problem problem = [&] {
    if (s.preset.empty() && s.graph_file.empty()) {
      if (columns.empty()) throw Error(ErrorCode::kInput, "--columns is required without a graph");
      return implied_problem(columns, estimator, latents.value_or(1));
    }
    return load_problem(s, estimator, columns);
  }();
  if (s.preset.empty() && s.graph_file.empty()) latents.reset();
  std::vector<std::string> observed;
  for (NodeId v : problem.dag.observed()) observed.push_back(problem.dag.name(v));
  const auto src = make_sample_source(select_columns(raw, observed));

  EstimateOutcome outcome;
  try {
    outcome = run_estimator(*src, problem, estimator, latents);
  } catch (const Error& e) {
    if (!is_estimation_failure(e.code())) throw;
    std::cerr << "estimation failed (" << to_string(e.code()) << "): " << e.what() << '\n';
    return kExitEstimation;
  }
  const std::string report = to_json(outcome, problem, estimator);
  if (s.out.empty()) {
    std::cout << report << '\n';
  } else {
    auto out = open_out(s.out);
    out << report << '\n';
  }
  return 0;
}

int cmd_experiment(const Shared& s, ExperimentConfig cfg, const std::string& estimator_name) {
  if (!s.preset.empty()) cfg.preset = s.preset;
  if (!s.graph_file.empty()) cfg.graph_file = s.graph_file;
  if (!estimator_name.empty()) cfg.estimator = parse_estimator(estimator_name);
  cfg.noise = parse_noise_family(s.noise);
  cfg.seed = s.seed;
  const ExperimentResult result = run_experiment(cfg);
  const fs::path dir = s.out.empty() ? fs::path("results") : fs::path(s.out);
  fs::create_directories(dir);
  {
    auto out = open_out(dir / "results.csv");
    write_results_csv(out, result);
  }
  {
    auto out = open_out(dir / "summary.csv");
    write_summary_csv(out, result);
  }
  auto out = open_out(dir / "plot.csv");
  write_plot_csv(out, result);
  for (const SummaryRow& row : result.summary) {
    std::cout << result.graph << ' ' << to_string(result.estimator) << " n=" << row.n
              << " median=" << format_double(row.median) << " q25=" << format_double(row.q25)
              << " q75=" << format_double(row.q75) << " failures=" << row.failures << '/'
              << row.replicates << '\n';
  }
  return 0;
}

int cmd_residualize(const std::string& input, const std::vector<std::string>& covariates,
                    std::vector<std::string> targets, const std::string& out_path) {
  const Sample s = read_csv_file(input);
  if (targets.empty()) {
    for (const auto& label : s.labels) {
      if (std::find(covariates.begin(), covariates.end(), label) == covariates.end()) {
        targets.push_back(label);
      }
    }
  }
  const Sample r = residualize_covariates(s, covariates, targets);
  if (out_path.empty()) {
    write_csv(std::cout, r.data, r.labels);
  } else {
    auto out = open_out(out_path);
    write_csv(out, r.data, r.labels);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Causal effect estimation in linear non-Gaussian models with latent confounders"};
  app.require_subcommand(1);

  Shared gen_s, est_s, exp_s;
  std::size_t gen_n = 10000;
  auto* gen = app.add_subcommand("generate", "Draw a random model and write a CSV sample");
  add_graph_flags(gen, gen_s);
  add_model_flags(gen, gen_s);
  gen->add_option("-n,--samples", gen_n, "Number of rows")->capture_default_str();
  gen->add_option("--out", gen_s.out, "Output CSV (a .json sidecar is written next to it)")->required();

  std::string est_input, est_name;
  std::vector<std::string> est_columns;
  std::optional<int> est_latents;
  auto* est = app.add_subcommand("estimate", "Run one estimator on a CSV sample");
  add_graph_flags(est, est_s);
  est->add_option("--input", est_input, "Input CSV")->required()->check(CLI::ExistingFile);
  est->add_option("--estimator", est_name, "Estimator name")->required();
  est->add_option("--columns", est_columns, "Role columns, Z,T,Y or I,T1,...,Y")->delimiter(',');
  est->add_option("--latents", est_latents, "Latent confounder count");
  est->add_option("--out", est_s.out, "Write the JSON report here instead of stdout");

  ExperimentConfig cfg;
  std::string exp_estimator;
  auto* exp = app.add_subcommand("experiment", "Sweep sample sizes with replicates");
  add_graph_flags(exp, exp_s);
  add_model_flags(exp, exp_s);
  exp->add_option("--estimator", exp_estimator, "Estimator name (defaults per preset)");
  exp->add_option("--columns", cfg.roles, "Role columns for a graph file")->delimiter(',');
  exp->add_option("--sizes", cfg.sizes, "Sample sizes")->delimiter(',')->capture_default_str();
  exp->add_option("--replicates", cfg.replicates, "Replicates per size")->capture_default_str();
  exp->add_option("--latents", cfg.latents, "Lower the latent count");
  exp->add_flag("--population", cfg.population, "Use exact population cumulants");
  exp->add_option("--out", exp_s.out, "Output directory")->capture_default_str();

  std::string res_input, res_out;
  std::vector<std::string> res_cov, res_targets;
  auto* res = app.add_subcommand("residualize", "Regress target columns on covariates");
  res->add_option("--input", res_input, "Input CSV")->required()->check(CLI::ExistingFile);
  res->add_option("--covariates", res_cov, "Covariate columns")->delimiter(',')->required();
  res->add_option("--targets", res_targets, "Target columns (default: all others)")->delimiter(',');
  res->add_option("--out", res_out, "Output CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (gen->parsed()) {
      if (gen_s.preset.empty() && gen_s.graph_file.empty()) {
        throw Error(ErrorCode::kInput, "generate needs --preset or --graph-file");
      }
      return cmd_generate(gen_s, gen_n);
    }
    if (est->parsed()) return cmd_estimate(est_s, est_input, est_name, est_columns, est_latents);
    if (exp->parsed()) return cmd_experiment(exp_s, cfg, exp_estimator);
    return cmd_residualize(res_input, res_cov, res_targets, res_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
}
