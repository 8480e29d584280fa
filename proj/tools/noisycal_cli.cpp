// Command-line front end: synthetic experiments, calibration of score files
// and standalone correction factors.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "noisycal/csv.hpp"
#include "noisycal/error.hpp"
#include "noisycal/experiment.hpp"
#include "noisycal/rng.hpp"

using namespace noisycal;

namespace {

struct ModelArgs {
  std::string model;
  int k = 0;
  double eps = 0.0;
  double nu = 0.0;
  int blocks = 2;

  ContaminationSpec spec() const {
    ContaminationSpec s;
    s.family = parse_noise_family(model);
    if (s.family == NoiseFamily::Custom) throw Error(ErrorCode::InvalidSpec, "use --transition for custom matrices");
    s.num_classes = k;
    s.epsilon = eps;
    s.nu = nu;
    s.blocks = blocks;
    s.validate();
    return s;
  }
};

void add_model_options(CLI::App* cmd, ModelArgs& args) {
  cmd->add_option("--model", args.model, "rr, block-rr or two-level-rr");
  cmd->add_option("--k", args.k, "number of classes");
  cmd->add_option("--eps", args.eps, "noise strength epsilon");
  cmd->add_option("--nu", args.nu, "two-level deviation nu");
  cmd->add_option("--blocks", args.blocks, "block count for block-rr");
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open config '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, "config '" + path + "': " + e.what());
  }
  return ExperimentConfig::from_json(j);
}

int run_synth_experiment(const std::string& config_path) {
  const ExperimentConfig config = load_config(config_path);
  const ExperimentResult result = run_synthetic(config);
  write_experiment(config, result);
  write_summary_csv(std::cout, result.summary);
  return 0;
}

int run_synth_data(const std::string& config_path, const std::string& out_path) {
  const ExperimentConfig config = load_config(config_path);
  const SynthData data = generate(config.synth);
  const TransitionMatrix transition = build_transition(config.contamination);
  const LabelVector noisy = sample_noisy_labels(data.y, transition, derive_seed(config.seed, 1));
  std::ofstream out(out_path);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write '" + out_path + "'");
  for (int j = 0; j < config.synth.dims; ++j) out << "x_" << j + 1 << ',';
  out << "y_true,y_noisy\n";
  for (Eigen::Index i = 0; i < data.X.rows(); ++i) {
    for (Eigen::Index j = 0; j < data.X.cols(); ++j) out << csv::format_double(data.X(i, j)) << ',';
    out << data.y[static_cast<std::size_t>(i)] + 1 << ',' << noisy[static_cast<std::size_t>(i)] + 1 << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Noise-adaptive conformal classification"};
  app.require_subcommand(1);

  std::string config_path;
  auto* synth_cmd = app.add_subcommand("synth-experiment", "run repeated synthetic experiments from a JSON config");
  synth_cmd->add_option("--config", config_path, "experiment config (JSON)")->required();

  std::string data_out;
  auto* data_cmd = app.add_subcommand("synth-data", "write one synthetic data set as CSV");
  data_cmd->add_option("--config", config_path, "experiment config (JSON)")->required();
  data_cmd->add_option("--out", data_out, "output CSV")->required();

  FromScoresConfig cal_config;
  std::string scores_path;
  std::string test_path;
  std::string transition_path;
  std::string method_name = "standard";
  std::string plus_name = "adaptive-fs";
  std::string supremum = "one-sided";
  bool no_randomize = false;
  ModelArgs cal_model;
  auto* cal_cmd = app.add_subcommand("calibrate", "calibrate on a score file and build prediction sets");
  cal_cmd->add_option("--scores", scores_path, "calibration CSV (p_k or s_k columns plus y_noisy)")->required();
  cal_cmd->add_option("--test", test_path, "test CSV (p_k or s_k columns, optional y_true)");
  auto* transition_opt = cal_cmd->add_option("--transition", transition_path, "transition matrix CSV");
  add_model_options(cal_cmd, cal_model);
  cal_cmd->add_option("--alpha", cal_config.alpha, "miscoverage level")->default_val(0.1);
  cal_cmd->add_option("--method", method_name,
                      "standard, adaptive-fs, adaptive-fs-simplified, adaptive-asy or adaptive-plus");
  cal_cmd->add_option("--plus-correction", plus_name, "correction used by adaptive-plus");
  cal_cmd->add_option("--out", cal_config.output, "output directory")->required();
  cal_cmd->add_option("--seed", cal_config.seed, "seed for randomized scores and Monte Carlo");
  cal_cmd->add_flag("--c-bound", cal_config.c_n.use_bound, "use sqrt(pi/(2n)) in place of Monte-Carlo c(n)");
  cal_cmd->add_option("--c-samples", cal_config.c_n.mc_samples, "Monte-Carlo replicates for c(n)");
  cal_cmd->add_option("--asy-samples", cal_config.asy.M, "Monte-Carlo replicates per grid level");
  cal_cmd->add_option("--asy-order", cal_config.asy.order, "Richardson order");
  cal_cmd->add_option("--asy-supremum", supremum, "one-sided or absolute");
  cal_cmd->add_flag("--no-randomize", no_randomize, "deterministic APS scores for probability inputs");

  ModelArgs corr_model;
  long corr_n = 0;
  std::string corr_method = "fs";
  bool corr_bound = false;
  long corr_mc = 100000;
  std::uint64_t corr_seed = CnConfig{}.seed;
  auto* corr_cmd = app.add_subcommand("correction", "print a finite-sample correction report as JSON");
  add_model_options(corr_cmd, corr_model);
  corr_cmd->add_option("--n", corr_n, "calibration sample size")->required();
  corr_cmd->add_option("--method", corr_method, "fs, fs-special, fs-simplified, cn or star-star");
  corr_cmd->add_flag("--c-bound", corr_bound, "use sqrt(pi/(2n)) in place of Monte-Carlo c(n)");
  corr_cmd->add_option("--mc", corr_mc, "Monte-Carlo replicates for c(n)");
  corr_cmd->add_option("--seed", corr_seed, "seed for c(n)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*synth_cmd) return run_synth_experiment(config_path);
    if (*data_cmd) return run_synth_data(config_path, data_out);

    if (*cal_cmd) {
      cal_config.scores_path = scores_path;
      if (!test_path.empty()) cal_config.test_path = test_path;
      cal_config.method = parse_method(method_name);
      cal_config.plus_correction = parse_method(plus_name);
      cal_config.randomize_scores = !no_randomize;
      cal_config.asy.kind = supremum == "absolute" ? SupremumKind::Absolute : SupremumKind::OneSided;
      if (supremum != "absolute" && supremum != "one-sided") {
        throw Error(ErrorCode::InvalidArgument, "--asy-supremum must be one-sided or absolute");
      }
      if (!cal_model.model.empty()) cal_config.spec = cal_model.spec();
      if (transition_opt->count() > 0) {
        cal_config.transition = read_transition_csv(transition_path);
      } else if (cal_config.spec) {
        cal_config.transition = build_transition(*cal_config.spec);
      } else if (cal_config.method != Method::Standard) {
        throw Error(ErrorCode::InvalidArgument, "adaptive methods need --transition or --model");
      }
      const FromScoresResult result = run_from_scores(cal_config);
      write_from_scores(cal_config, result);
      std::cout << to_json(result.threshold).dump(2) << '\n';
      return 0;
    }

    if (*corr_cmd) {
      const ContaminationSpec spec = corr_model.spec();
      const double c_n = corr_bound ? c_of_n_bound(corr_n) : c_of_n(corr_n, corr_mc, corr_seed).mean;
      const TransitionMatrix transition = build_transition(spec);
      nlohmann::json out;
      if (corr_method == "fs") {
        out = to_json(delta_fs(corr_n, transition.W(), c_n));
      } else if (corr_method == "fs-special") {
        out = to_json(delta_fs_special(spec, corr_n, c_n));
      } else if (corr_method == "fs-simplified") {
        out = to_json(delta_fs_at(corr_n, transition.W(), c_n, rr_beta(spec.num_classes, spec.epsilon)));
      } else if (corr_method == "cn") {
        out = to_json(delta_cn(c_n));
      } else if (corr_method == "star-star") {
        out = {{"method", "star-star-bound"}, {"value", delta_star_star_bound(corr_n, transition.W())}};
      } else {
        throw Error(ErrorCode::InvalidArgument, "unknown correction method '" + corr_method + "'");
      }
      out["n"] = corr_n;
      out["K"] = spec.num_classes;
      out["transition_condition_number"] = transition.condition_number();
      std::cout << out.dump(2) << '\n';
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return is_validation_error(e.code()) ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
