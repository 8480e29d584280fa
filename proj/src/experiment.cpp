#include "noisycal/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <set>

#include "noisycal/csv.hpp"
#include "noisycal/error.hpp"
#include "noisycal/parallel.hpp"
#include "noisycal/rng.hpp"

namespace noisycal {
namespace {

// Stream tags for the per-repetition generators.
constexpr std::uint64_t kNoiseStream = 1;
constexpr std::uint64_t kCalScoreStream = 2;
constexpr std::uint64_t kTestScoreStream = 3;
constexpr std::uint64_t kAsyStream = 4;

const std::vector<std::string> kConfigKeys = {
    "num_classes", "dims", "clusters_per_class", "cube_side", "informative_dims", "n_train", "n_cal", "n_test",
    "imbalance_mu", "noise_model", "epsilon", "nu", "blocks", "custom_matrix", "alpha", "methods", "repetitions",
    "output", "seed", "c_n_source", "c_n_samples", "c_n_seed", "asy_h_ladder", "asy_samples", "asy_order",
    "asy_supremum", "plus_correction", "randomize_scores", "jitter", "softmax_l2", "softmax_iterations",
    "softmax_learning_rate",
};

std::string supremum_name(SupremumKind kind) { return kind == SupremumKind::Absolute ? "absolute" : "one-sided"; }

SupremumKind parse_supremum(const std::string& name) {
  if (name == "one-sided") return SupremumKind::OneSided;
  if (name == "absolute") return SupremumKind::Absolute;
  throw Error(ErrorCode::InvalidArgument, "asy_supremum must be 'one-sided' or 'absolute'");
}

double resolve_c_n(long n, const CnConfig& config) {
  return config.use_bound ? c_of_n_bound(n) : c_of_n(n, config.mc_samples, config.seed).mean;
}

std::string delta_label(Method method, Method plus_correction) {
  switch (method) {
    case Method::Standard: return "none";
    case Method::AdaptiveFs: return "fs";
    case Method::AdaptiveFsSimplified: return "fs-simplified";
    case Method::AdaptiveAsy: return "asy";
    case Method::AdaptivePlus: return delta_label(plus_correction, Method::AdaptiveFs);
  }
  return "unknown";
}

ThresholdResult threshold_for(Method method, const CalibrationSet& cal, const Matrix& W, double alpha,
                              const std::optional<CorrectionReport>& correction) {
  switch (method) {
    case Method::Standard: return standard_threshold(cal, alpha);
    case Method::AdaptivePlus: return optimistic_threshold(cal, W, alpha, *correction);
    default: return adaptive_threshold(cal, W, alpha, *correction);
  }
}

double mean_of(const std::vector<double>& v) {
  double sum = 0.0;
  for (const double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

double se_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (const double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

std::string format_set(const LabelSet& set) {
  std::string out;
  for (std::size_t j = 0; j < set.size(); ++j) {
    if (j) out += ' ';
    out += std::to_string(set[j] + 1);
  }
  return out;
}

void write_result_row(std::ostream& out, const ResultRow& r, bool with_coverage) {
  using csv::format_double;
  out << r.repetition << ',' << to_string(r.method) << ',' << r.n << ',' << r.K << ',' << format_double(r.alpha) << ','
      << r.delta_method << ',' << format_double(r.delta_value) << ',' << format_double(r.tau) << ',';
  if (with_coverage) out << format_double(r.coverage) << ',' << format_double(r.avg_size);
  else out << ',';
  out << ',' << r.seed << '\n';
}

template <typename T>
T get_field(const nlohmann::json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("config field '") + key + "': " + e.what());
  }
}

void ensure_directory(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::InvalidArgument, "cannot create output directory '" + dir + "': " + ec.message());
}

std::ofstream open_output(const std::string& dir, const std::string& name) {
  std::ofstream out(std::filesystem::path(dir) / name);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + name + " in '" + dir + "'");
  return out;
}

}  // namespace

std::string to_string(Method method) {
  switch (method) {
    case Method::Standard: return "standard";
    case Method::AdaptiveFs: return "adaptive-fs";
    case Method::AdaptiveFsSimplified: return "adaptive-fs-simplified";
    case Method::AdaptiveAsy: return "adaptive-asy";
    case Method::AdaptivePlus: return "adaptive-plus";
  }
  return "unknown";
}

Method parse_method(const std::string& name) {
  for (const Method m : {Method::Standard, Method::AdaptiveFs, Method::AdaptiveFsSimplified, Method::AdaptiveAsy,
                         Method::AdaptivePlus}) {
    if (to_string(m) == name) return m;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown method '" + name + "'");
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidArgument, "config must be a JSON object");
  const std::set<std::string> known(kConfigKeys.begin(), kConfigKeys.end());
  for (const auto& item : j.items()) {
    if (!known.count(item.key())) throw Error(ErrorCode::InvalidArgument, "unknown config field '" + item.key() + "'");
  }
  for (const auto& key : kConfigKeys) {
    if (!j.contains(key)) throw Error(ErrorCode::InvalidArgument, "missing config field '" + key + "'");
  }
  ExperimentConfig c;
  c.synth.num_classes = get_field<int>(j, "num_classes");
  c.synth.dims = get_field<int>(j, "dims");
  c.synth.clusters_per_class = get_field<int>(j, "clusters_per_class");
  c.synth.cube_side = get_field<double>(j, "cube_side");
  c.synth.informative_dims = get_field<int>(j, "informative_dims");
  c.synth.n_train = get_field<long>(j, "n_train");
  c.synth.n_cal = get_field<long>(j, "n_cal");
  c.synth.n_test = get_field<long>(j, "n_test");
  c.synth.imbalance_mu = get_field<double>(j, "imbalance_mu");

  c.contamination.family = parse_noise_family(get_field<std::string>(j, "noise_model"));
  c.contamination.num_classes = c.synth.num_classes;
  c.contamination.epsilon = get_field<double>(j, "epsilon");
  c.contamination.nu = get_field<double>(j, "nu");
  c.contamination.blocks = get_field<int>(j, "blocks");
  if (!j.at("custom_matrix").is_null()) {
    const auto rows = get_field<std::vector<std::vector<double>>>(j, "custom_matrix");
    Matrix T(static_cast<Eigen::Index>(rows.size()), rows.empty() ? 0 : static_cast<Eigen::Index>(rows[0].size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (static_cast<Eigen::Index>(rows[r].size()) != T.cols()) {
        throw Error(ErrorCode::InvalidSpec, "custom_matrix rows differ in length");
      }
      for (std::size_t col = 0; col < rows[r].size(); ++col) {
        T(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(col)) = rows[r][col];
      }
    }
    c.contamination.custom_matrix = T;
  }

  c.alpha = get_field<double>(j, "alpha");
  for (const auto& name : get_field<std::vector<std::string>>(j, "methods")) c.methods.push_back(parse_method(name));
  c.repetitions = get_field<int>(j, "repetitions");
  c.output = get_field<std::string>(j, "output");
  c.seed = get_field<std::uint64_t>(j, "seed");
  c.synth.seed = c.seed;

  const auto source = get_field<std::string>(j, "c_n_source");
  if (source != "monte-carlo" && source != "bound") {
    throw Error(ErrorCode::InvalidArgument, "c_n_source must be 'monte-carlo' or 'bound'");
  }
  c.c_n.use_bound = source == "bound";
  c.c_n.mc_samples = get_field<long>(j, "c_n_samples");
  c.c_n.seed = get_field<std::uint64_t>(j, "c_n_seed");

  c.asy.h_ladder = get_field<std::vector<double>>(j, "asy_h_ladder");
  c.asy.M = get_field<long>(j, "asy_samples");
  c.asy.order = get_field<int>(j, "asy_order");
  c.asy.kind = parse_supremum(get_field<std::string>(j, "asy_supremum"));

  c.plus_correction = parse_method(get_field<std::string>(j, "plus_correction"));
  c.randomize_scores = get_field<bool>(j, "randomize_scores");
  c.jitter = get_field<bool>(j, "jitter");
  c.softmax.l2 = get_field<double>(j, "softmax_l2");
  c.softmax.iterations = get_field<int>(j, "softmax_iterations");
  c.softmax.learning_rate = get_field<double>(j, "softmax_learning_rate");
  c.validate();
  return c;
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["num_classes"] = synth.num_classes;
  j["dims"] = synth.dims;
  j["clusters_per_class"] = synth.clusters_per_class;
  j["cube_side"] = synth.cube_side;
  j["informative_dims"] = synth.informative_dims;
  j["n_train"] = synth.n_train;
  j["n_cal"] = synth.n_cal;
  j["n_test"] = synth.n_test;
  j["imbalance_mu"] = synth.imbalance_mu;
  j["noise_model"] = noisycal::to_string(contamination.family);
  j["epsilon"] = contamination.epsilon;
  j["nu"] = contamination.nu;
  j["blocks"] = contamination.blocks;
  if (contamination.custom_matrix) {
    std::vector<std::vector<double>> rows;
    for (Eigen::Index r = 0; r < contamination.custom_matrix->rows(); ++r) {
      const auto row = contamination.custom_matrix->row(r);
      rows.emplace_back(row.begin(), row.end());
    }
    j["custom_matrix"] = rows;
  } else {
    j["custom_matrix"] = nullptr;
  }
  j["alpha"] = alpha;
  std::vector<std::string> names;
  for (const Method m : methods) names.push_back(noisycal::to_string(m));
  j["methods"] = names;
  j["repetitions"] = repetitions;
  j["output"] = output;
  j["seed"] = seed;
  j["c_n_source"] = c_n.use_bound ? "bound" : "monte-carlo";
  j["c_n_samples"] = c_n.mc_samples;
  j["c_n_seed"] = c_n.seed;
  j["asy_h_ladder"] = asy.h_ladder;
  j["asy_samples"] = asy.M;
  j["asy_order"] = asy.order;
  j["asy_supremum"] = supremum_name(asy.kind);
  j["plus_correction"] = noisycal::to_string(plus_correction);
  j["randomize_scores"] = randomize_scores;
  j["jitter"] = jitter;
  j["softmax_l2"] = softmax.l2;
  j["softmax_iterations"] = softmax.iterations;
  j["softmax_learning_rate"] = softmax.learning_rate;
  return j;
}

void ExperimentConfig::validate() const {
  synth.validate();
  if (contamination.num_classes != synth.num_classes) {
    throw Error(ErrorCode::InvalidSpec, "contamination model and data disagree on the number of classes");
  }
  contamination.validate();
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0, 1)");
  if (methods.empty()) throw Error(ErrorCode::InvalidArgument, "methods must be nonempty");
  if (repetitions < 1) throw Error(ErrorCode::InvalidArgument, "repetitions must be at least 1");
  if (plus_correction == Method::Standard || plus_correction == Method::AdaptivePlus) {
    throw Error(ErrorCode::InvalidArgument, "plus_correction must name an adaptive correction");
  }
  if (!c_n.use_bound && c_n.mc_samples < 1000) throw Error(ErrorCode::InvalidArgument, "c_n_samples must be >= 1000");
  if (asy.M < 1000) throw Error(ErrorCode::InvalidArgument, "asy_samples must be >= 1000");
  if (asy.order < 0) throw Error(ErrorCode::InvalidArgument, "asy_order must be nonnegative");
  if (softmax.iterations < 0 || !(softmax.learning_rate > 0.0) || !(softmax.l2 >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "invalid softmax settings");
  }
}

CorrectionReport compute_correction(Method method, const CalibrationSet& cal, const TransitionMatrix& transition,
                                    const std::optional<ContaminationSpec>& spec, const CnConfig& c_n,
                                    const AsyConfig& asy, std::uint64_t asy_seed, Method plus_correction) {
  const auto n = static_cast<long>(cal.size());
  switch (method) {
    case Method::Standard: return delta_cn(0.0);
    case Method::AdaptiveFs: return delta_fs(n, transition.W(), resolve_c_n(n, c_n));
    case Method::AdaptiveFsSimplified: {
      if (!spec) throw Error(ErrorCode::InvalidArgument, "adaptive-fs-simplified needs the noise level epsilon");
      return delta_fs_at(n, transition.W(), resolve_c_n(n, c_n), rr_beta(transition.num_classes(), spec->epsilon));
    }
    case Method::AdaptiveAsy: {
      AsyConfig level = asy;
      level.seed = asy_seed;
      return delta_asy(cal, transition.W(), level);
    }
    case Method::AdaptivePlus:
      return compute_correction(plus_correction, cal, transition, spec, c_n, asy, asy_seed, Method::AdaptiveFs);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown method");
}

ExperimentResult run_synthetic(const ExperimentConfig& config) {
  config.validate();
  const TransitionMatrix transition = build_transition(config.contamination);
  const int K = config.synth.num_classes;
  const long n = config.synth.n_cal;
  const std::optional<ContaminationSpec> spec = config.contamination;

  // Data-independent corrections are shared by every repetition.
  std::map<Method, CorrectionReport> shared;
  for (const Method m : config.methods) {
    const Method base = m == Method::AdaptivePlus ? config.plus_correction : m;
    if ((base == Method::AdaptiveFs || base == Method::AdaptiveFsSimplified) && !shared.count(base)) {
      const double c_n = resolve_c_n(n, config.c_n);
      shared.emplace(base, base == Method::AdaptiveFs
                               ? delta_fs(n, transition.W(), c_n)
                               : delta_fs_at(n, transition.W(), c_n, rr_beta(K, config.contamination.epsilon)));
    }
  }

  const std::size_t per_rep = config.methods.size();
  std::vector<ResultRow> rows(static_cast<std::size_t>(config.repetitions) * per_rep);
  parallel_for(static_cast<std::size_t>(config.repetitions), [&](std::size_t r) {
    const std::uint64_t rep_seed = config.seed + r;
    try {
      SynthConfig synth = config.synth;
      synth.seed = rep_seed;
      const SynthData data = generate(synth);
      const long n_train = synth.n_train;
      const long n_labeled = n_train + synth.n_cal;

      const std::span<const Label> labeled(data.y.data(), static_cast<std::size_t>(n_labeled));
      const LabelVector noisy = sample_noisy_labels(labeled, transition, derive_seed(rep_seed, kNoiseStream));

      const RowMatrix X_train = data.X.topRows(n_train);
      const SoftmaxModel model =
          train_softmax(X_train, std::span<const Label>(noisy.data(), static_cast<std::size_t>(n_train)), K, config.softmax);

      ApsOptions cal_options{config.randomize_scores, derive_seed(rep_seed, kCalScoreStream), config.jitter};
      ApsOptions test_options{config.randomize_scores, derive_seed(rep_seed, kTestScoreStream), config.jitter};
      const ScoreMatrix cal_scores = aps_scores(predict_probs(model, data.X.middleRows(n_train, synth.n_cal)), cal_options);
      const ScoreMatrix test_scores = aps_scores(predict_probs(model, data.X.bottomRows(synth.n_test)), test_options);

      const CalibrationSet cal =
          CalibrationSet::make(cal_scores, LabelVector(noisy.begin() + n_train, noisy.end()));
      const std::span<const Label> test_truth(data.y.data() + n_labeled, static_cast<std::size_t>(synth.n_test));

      std::optional<CorrectionReport> asy;
      for (std::size_t mi = 0; mi < per_rep; ++mi) {
        const Method m = config.methods[mi];
        const Method base = m == Method::AdaptivePlus ? config.plus_correction : m;
        std::optional<CorrectionReport> correction;
        if (m != Method::Standard) {
          if (auto it = shared.find(base); it != shared.end()) {
            correction = it->second;
          } else {
            if (!asy) {
              asy = compute_correction(Method::AdaptiveAsy, cal, transition, spec, config.c_n, config.asy,
                                       derive_seed(rep_seed, kAsyStream), config.plus_correction);
            }
            correction = asy;
          }
        }
        const ThresholdResult threshold = threshold_for(m, cal, transition.W(), config.alpha, correction);
        const Evaluation eval = evaluate(prediction_sets(test_scores, threshold.tau), test_truth);
        ResultRow& row = rows[r * per_rep + mi];
        row.repetition = static_cast<int>(r);
        row.method = m;
        row.n = n;
        row.K = K;
        row.alpha = config.alpha;
        row.delta_method = delta_label(m, config.plus_correction);
        row.delta_value = correction ? correction->value : 0.0;
        row.tau = threshold.tau;
        row.coverage = eval.coverage;
        row.avg_size = eval.avg_size;
        row.seed = rep_seed;
      }
    } catch (const Error& e) {
      throw Error(e.code(), "repetition " + std::to_string(r) + ": " + e.detail(), e.index());
    }
  });

  ExperimentResult result;
  result.rows = std::move(rows);
  result.summary = summarize(result.rows, config.methods);
  return result;
}

std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows, const std::vector<Method>& methods) {
  std::vector<SummaryRow> summary;
  for (const Method m : methods) {
    std::vector<double> coverage;
    std::vector<double> size;
    std::vector<double> delta;
    for (const auto& row : rows) {
      if (row.method != m) continue;
      coverage.push_back(row.coverage);
      size.push_back(row.avg_size);
      delta.push_back(row.delta_value);
    }
    if (coverage.empty()) continue;
    SummaryRow s;
    s.method = m;
    s.repetitions = static_cast<int>(coverage.size());
    s.coverage_mean = mean_of(coverage);
    s.coverage_se = se_of(coverage);
    s.size_mean = mean_of(size);
    s.size_se = se_of(size);
    s.delta_mean = mean_of(delta);
    summary.push_back(s);
  }
  return summary;
}

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << "repetition,method,n,K,alpha,delta_method,delta_value,tau,coverage,avg_size,seed\n";
  for (const auto& row : rows) write_result_row(out, row, true);
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  using csv::format_double;
  out << "method,repetitions,coverage_mean,coverage_se,size_mean,size_se,delta_mean\n";
  for (const auto& s : rows) {
    out << to_string(s.method) << ',' << s.repetitions << ',' << format_double(s.coverage_mean) << ','
        << format_double(s.coverage_se) << ',' << format_double(s.size_mean) << ',' << format_double(s.size_se) << ','
        << format_double(s.delta_mean) << '\n';
  }
}

void write_experiment(const ExperimentConfig& config, const ExperimentResult& result) {
  if (config.output.empty()) return;
  ensure_directory(config.output);
  auto results = open_output(config.output, "results.csv");
  write_results_csv(results, result.rows);
  auto summary = open_output(config.output, "summary.csv");
  write_summary_csv(summary, result.summary);
}

ScoreFile read_score_file(std::istream& in) {
  const std::vector<csv::Row> rows = csv::read_rows(in);
  if (rows.empty()) throw Error(ErrorCode::ParseError, "score file is empty");
  const auto& header = rows.front().fields;
  ScoreFile file;
  std::size_t K = 0;
  char prefix = 0;
  while (K < header.size()) {
    const std::string& name = header[K];
    if (name.size() < 3 || name[1] != '_' || (name[0] != 'p' && name[0] != 's')) break;
    if (prefix == 0) prefix = name[0];
    if (name[0] != prefix || name.substr(2) != std::to_string(K + 1)) {
      throw Error(ErrorCode::ParseError, "line 1: unexpected column '" + name + "'", 1);
    }
    ++K;
  }
  if (K == 0) throw Error(ErrorCode::ParseError, "line 1: header must start with p_1 or s_1", 1);
  file.are_probabilities = prefix == 'p';
  int noisy_col = -1;
  int true_col = -1;
  for (std::size_t c = K; c < header.size(); ++c) {
    if (header[c] == "y_noisy" && noisy_col < 0) noisy_col = static_cast<int>(c);
    else if (header[c] == "y_true" && true_col < 0) true_col = static_cast<int>(c);
    else throw Error(ErrorCode::ParseError, "line 1: unexpected column '" + header[c] + "'", 1);
  }

  const std::size_t n = rows.size() - 1;
  if (n == 0) throw Error(ErrorCode::ParseError, "score file has no data rows");
  file.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(K));
  if (noisy_col >= 0) file.noisy_labels.emplace(n);
  if (true_col >= 0) file.true_labels.emplace(n);
  auto parse_label = [&](const std::string& field, std::size_t line) {
    const long v = csv::parse_long(field, line);
    if (v < 1 || v > static_cast<long>(K)) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": label " + field + " outside 1.." + std::to_string(K),
                  static_cast<int>(line));
    }
    return static_cast<Label>(v - 1);
  };
  for (std::size_t i = 0; i < n; ++i) {
    const csv::Row& row = rows[i + 1];
    if (row.fields.size() != header.size()) {
      throw Error(ErrorCode::ParseError,
                  "line " + std::to_string(row.line) + ": expected " + std::to_string(header.size()) + " fields, found " +
                      std::to_string(row.fields.size()),
                  static_cast<int>(row.line));
    }
    for (std::size_t k = 0; k < K; ++k) {
      const double v = csv::parse_double(row.fields[k], row.line);
      if (!(v >= 0.0 && v <= 1.0)) {
        throw Error(ErrorCode::ParseError, "line " + std::to_string(row.line) + ": value outside [0, 1]",
                    static_cast<int>(row.line));
      }
      file.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = v;
    }
    if (noisy_col >= 0) (*file.noisy_labels)[i] = parse_label(row.fields[static_cast<std::size_t>(noisy_col)], row.line);
    if (true_col >= 0) (*file.true_labels)[i] = parse_label(row.fields[static_cast<std::size_t>(true_col)], row.line);
  }
  return file;
}

ScoreFile read_score_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open '" + path + "'");
  return read_score_file(in);
}

nlohmann::json to_json(const ThresholdResult& threshold) {
  nlohmann::json j;
  j["tau"] = threshold.tau;
  j["index"] = threshold.index ? nlohmann::json(*threshold.index) : nlohmann::json(nullptr);
  j["method"] = to_string(threshold.method);
  j["set_empty"] = threshold.set_empty;
  j["optimistic_warning"] = threshold.optimistic_warning;
  j["correction"] = threshold.correction ? to_json(*threshold.correction) : nlohmann::json(nullptr);
  return j;
}

FromScoresResult run_from_scores(const FromScoresConfig& config) {
  if (config.method == Method::AdaptivePlus &&
      (config.plus_correction == Method::Standard || config.plus_correction == Method::AdaptivePlus)) {
    throw Error(ErrorCode::InvalidArgument, "plus correction must name an adaptive correction");
  }
  const ScoreFile cal_file = read_score_file(config.scores_path);
  if (!cal_file.noisy_labels) throw Error(ErrorCode::ParseError, "calibration file needs a y_noisy column");
  const int K = static_cast<int>(cal_file.values.cols());
  if (config.transition.num_classes() != K && config.method != Method::Standard) {
    throw Error(ErrorCode::DimensionMismatch, "transition matrix has " + std::to_string(config.transition.num_classes()) +
                                                  " classes but the scores have " + std::to_string(K));
  }

  auto to_scores = [&](const ScoreFile& file, std::uint64_t stream) {
    if (!file.are_probabilities) return file.values;
    ApsOptions options{config.randomize_scores, derive_seed(config.seed, stream), false};
    return aps_scores(file.values, options).values;
  };

  const CalibrationSet cal = CalibrationSet::make(to_scores(cal_file, kCalScoreStream), *cal_file.noisy_labels);
  FromScoresResult result;
  std::optional<CorrectionReport> correction;
  if (config.method != Method::Standard) {
    correction = compute_correction(config.method, cal, config.transition, config.spec, config.c_n, config.asy,
                                    derive_seed(config.seed, kAsyStream), config.plus_correction);
  }
  result.threshold = threshold_for(config.method, cal, config.transition.W(), config.alpha, correction);

  ResultRow& row = result.row;
  row.method = config.method;
  row.n = static_cast<long>(cal.size());
  row.K = K;
  row.alpha = config.alpha;
  row.delta_method = delta_label(config.method, config.plus_correction);
  row.delta_value = correction ? correction->value : 0.0;
  row.tau = result.threshold.tau;
  row.seed = config.seed;

  if (config.test_path) {
    const ScoreFile test_file = read_score_file(*config.test_path);
    if (test_file.values.cols() != K) throw Error(ErrorCode::DimensionMismatch, "test file has a different K");
    const RowMatrix test_scores = to_scores(test_file, kTestScoreStream);
    result.sets.resize(static_cast<std::size_t>(test_scores.rows()));
    for (Eigen::Index i = 0; i < test_scores.rows(); ++i) {
      result.sets[static_cast<std::size_t>(i)] = prediction_set(
          std::span<const double>(test_scores.row(i).data(), static_cast<std::size_t>(K)), result.threshold.tau);
    }
    if (test_file.true_labels) {
      result.evaluation = evaluate(result.sets, *test_file.true_labels);
      row.coverage = result.evaluation->coverage;
      row.avg_size = result.evaluation->avg_size;
    }
  }
  return result;
}

void write_from_scores(const FromScoresConfig& config, const FromScoresResult& result) {
  ensure_directory(config.output);
  {
    auto out = open_output(config.output, "threshold.json");
    out << to_json(result.threshold).dump(2) << '\n';
  }
  {
    auto out = open_output(config.output, "sets.csv");
    out << "row,labels,size\n";
    for (std::size_t i = 0; i < result.sets.size(); ++i) {
      out << i + 1 << ',' << format_set(result.sets[i]) << ',' << result.sets[i].size() << '\n';
    }
  }
  {
    auto out = open_output(config.output, "results.csv");
    out << "repetition,method,n,K,alpha,delta_method,delta_value,tau,coverage,avg_size,seed\n";
    write_result_row(out, result.row, result.evaluation.has_value());
  }
}

}  // namespace noisycal
