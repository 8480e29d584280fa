#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "noisycal/calibrate.hpp"
#include "noisycal/correction.hpp"
#include "noisycal/noise_model.hpp"
#include "noisycal/synth.hpp"

namespace noisycal {

enum class Method { Standard, AdaptiveFs, AdaptiveFsSimplified, AdaptiveAsy, AdaptivePlus };
std::string to_string(Method method);
Method parse_method(const std::string& name);

// How c(n) is obtained for the finite-sample corrections.
struct CnConfig {
  bool use_bound = false;  // sqrt(pi/(2n)) instead of Monte Carlo
  long mc_samples = 100000;
  std::uint64_t seed = 20240601;
};

struct ExperimentConfig {
  SynthConfig synth;
  ContaminationSpec contamination;
  double alpha = 0.1;
  std::vector<Method> methods;
  int repetitions = 1;
  std::string output;  // directory; empty means do not write files
  std::uint64_t seed = 0;
  CnConfig c_n;
  AsyConfig asy;
  // Correction used by adaptive-plus.
  Method plus_correction = Method::AdaptiveFs;
  bool randomize_scores = true;
  bool jitter = false;
  SoftmaxOptions softmax;

  // Every key is required and unknown keys are rejected.
  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  void validate() const;
};

struct ResultRow {
  int repetition = 0;
  Method method = Method::Standard;
  long n = 0;
  int K = 0;
  double alpha = 0.0;
  std::string delta_method;
  double delta_value = 0.0;
  double tau = 1.0;
  double coverage = 0.0;
  double avg_size = 0.0;
  std::uint64_t seed = 0;
};

struct SummaryRow {
  Method method = Method::Standard;
  int repetitions = 0;
  double coverage_mean = 0.0;
  double coverage_se = 0.0;
  double size_mean = 0.0;
  double size_se = 0.0;
  double delta_mean = 0.0;
};

struct ExperimentResult {
  std::vector<ResultRow> rows;  // ordered by repetition, then method as configured
  std::vector<SummaryRow> summary;
};

ExperimentResult run_synthetic(const ExperimentConfig& config);

std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows, const std::vector<Method>& methods);

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows);
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);

// Writes results.csv and summary.csv into config.output.
void write_experiment(const ExperimentConfig& config, const ExperimentResult& result);

// Score files: header p_1..p_K (probabilities, turned into APS scores) or
// s_1..s_K (scores used as given), optionally followed by y_noisy and y_true
// columns with 1-based labels.
struct ScoreFile {
  RowMatrix values;
  bool are_probabilities = false;
  std::optional<LabelVector> noisy_labels;
  std::optional<LabelVector> true_labels;
};

ScoreFile read_score_file(std::istream& in);
ScoreFile read_score_file(const std::string& path);

struct FromScoresConfig {
  std::string scores_path;
  std::optional<std::string> test_path;
  TransitionMatrix transition = TransitionMatrix::from_matrix(Matrix::Identity(1, 1));
  std::optional<ContaminationSpec> spec;  // needed by adaptive-fs-simplified
  double alpha = 0.1;
  Method method = Method::Standard;
  CnConfig c_n;
  AsyConfig asy;
  Method plus_correction = Method::AdaptiveFs;
  bool randomize_scores = true;
  std::uint64_t seed = 0;
  std::string output;
};

struct FromScoresResult {
  ThresholdResult threshold;
  std::vector<LabelSet> sets;           // one per test row
  std::optional<Evaluation> evaluation;  // when test labels are known
  ResultRow row;
};

FromScoresResult run_from_scores(const FromScoresConfig& config);

// threshold.json, sets.csv and results.csv in config.output.
void write_from_scores(const FromScoresConfig& config, const FromScoresResult& result);

nlohmann::json to_json(const ThresholdResult& threshold);

// The correction used by an adaptive method. Standard needs none.
CorrectionReport compute_correction(Method method, const CalibrationSet& cal, const TransitionMatrix& transition,
                                    const std::optional<ContaminationSpec>& spec, const CnConfig& c_n,
                                    const AsyConfig& asy, std::uint64_t asy_seed, Method plus_correction);

}  // namespace noisycal
