// Command-line front end: certify | predict | curve | tightness over
// synthetic datasets with known label distributions.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "topkcert/confidence_bounds.hpp"
#include "topkcert/evaluation.hpp"
#include "topkcert/radius_solver.hpp"
#include "topkcert/tightness.hpp"
#include "topkcert/topk_predict.hpp"

namespace {

using namespace topkcert;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

// Writes to the file at `path`, or to stdout when path is empty.
class OutputTarget {
 public:
  explicit OutputTarget(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) {
        throw std::runtime_error("topkcert: cannot open output file '" + path +
                                 "'");
      }
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

struct GlobalFlags {
  double sigma = 0.5;
  int k = 3;
  std::int64_t n = 100000;
  double alpha = 0.001;
  double mu = 1e-5;
  std::string bound_method = "simuem";
  std::uint64_t seed = 0;
  std::string out;
};

EvaluationConfig make_config(const GlobalFlags& flags) {
  EvaluationConfig config;
  config.sigma = flags.sigma;
  config.certify.k = flags.k;
  config.certify.n = flags.n;
  config.certify.alpha = flags.alpha;
  config.certify.mu = flags.mu;
  config.certify.method = bound_method_from_string(flags.bound_method);
  config.certify.seed = flags.seed;
  return config;
}

int run_certify(const GlobalFlags& flags, const std::string& dataset_path,
                const std::vector<std::string>& examples, int label_override) {
  const SyntheticDataset dataset = load_dataset(dataset_path);
  const EvaluationConfig config = make_config(flags);
  const std::vector<ExampleResult> results =
      run_batch(dataset, config, examples, label_override);
  OutputTarget target(flags.out);
  write_results_csv(target.stream(), results, config);
  return 0;
}

int run_predict(const GlobalFlags& flags, const std::string& dataset_path,
                const std::vector<std::string>& examples) {
  const SyntheticDataset dataset = load_dataset(dataset_path);
  const NoiseModel noise(flags.sigma);
  std::vector<std::vector<double>> rows;
  rows.reserve(dataset.examples.size());
  for (const DatasetExample& example : dataset.examples) {
    rows.push_back(example.probs);
  }
  const SyntheticTabularClassifier classifier(dataset.label_count, rows, noise,
                                              dataset.dim, dataset.label_seed);

  PredictParams params;
  params.k = flags.k;
  params.n = flags.n;
  params.alpha = flags.alpha;

  OutputTarget target(flags.out);
  std::ostream& out = target.stream();
  out << "example_id,true_label,abstained,predicted_labels,pvalues\n";
  for (std::size_t i = 0; i < dataset.examples.size(); ++i) {
    const DatasetExample& example = dataset.examples[i];
    if (!examples.empty() &&
        std::find(examples.begin(), examples.end(), example.id) ==
            examples.end()) {
      continue;
    }
    params.seed = detail::derive_seed(flags.seed, i);
    const PredictionResult result =
        predict_topk(classifier, classifier.anchor(i), noise, params);
    out << example.id << ',' << example.true_label << ','
        << (result.abstained ? 1 : 0) << ',';
    for (std::size_t j = 0; j < result.labels.size(); ++j) {
      out << (j ? "|" : "") << result.labels[j];
    }
    out << ',';
    for (std::size_t j = 0; j < result.pvalues.size(); ++j) {
      out << (j ? "|" : "") << format_double(result.pvalues[j]);
    }
    out << '\n';
  }
  return 0;
}

int run_curve(const GlobalFlags& flags, const std::string& dataset_path,
              double rho, double grid_max, double grid_step) {
  EvaluationConfig config = make_config(flags);
  config.dataset_path = dataset_path;
  config.rho = rho;
  if (grid_step <= 0.0 || grid_max < 0.0) {
    throw std::runtime_error("topkcert: grid step must be > 0 and max >= 0");
  }
  for (double r = 0.0; r <= grid_max + 1e-12; r += grid_step) {
    config.radius_grid.push_back(r);
  }
  const std::string prefix = flags.out.empty() ? "topkcert_curve" : flags.out;
  run_batch_to_files(config, prefix);
  std::cerr << "wrote " << prefix << ".results.csv, " << prefix
            << ".curve.csv, " << prefix << ".meta.json\n";
  return 0;
}

ProbabilityBounds load_bounds(const std::string& bounds_file, double lower,
                              const std::vector<double>& uppers,
                              int target_label, BoundMethod method,
                              double alpha) {
  double use_lower = lower;
  std::vector<double> use_uppers = uppers;
  int use_target = target_label;
  if (!bounds_file.empty()) {
    std::ifstream in(bounds_file);
    if (!in) {
      throw std::runtime_error("topkcert: cannot open bounds file '" +
                               bounds_file + "'");
    }
    nlohmann::json doc;
    in >> doc;
    use_lower = doc.at("lower").get<double>();
    use_uppers = doc.at("uppers").get<std::vector<double>>();
    use_target = doc.value("target_label", 1);
  }
  if (use_uppers.empty()) {
    throw std::runtime_error(
        "topkcert: tightness needs --bounds-file or --lower/--uppers");
  }

  const int c = static_cast<int>(use_uppers.size()) + 1;
  if (use_target < 1 || use_target > c) {
    throw std::runtime_error("topkcert: target_label outside [1, c]");
  }
  ProbabilityBounds bounds;
  bounds.target_label = use_target;
  bounds.lower = use_lower;
  bounds.alpha = alpha;
  bounds.method = method;
  bounds.upper.assign(static_cast<std::size_t>(c),
                      std::numeric_limits<double>::quiet_NaN());
  std::size_t next = 0;
  for (int i = 1; i <= c; ++i) {
    if (i == use_target) continue;
    bounds.upper[static_cast<std::size_t>(i - 1)] = use_uppers.at(next++);
  }
  return bounds;
}

int run_tightness(const GlobalFlags& flags, const ProbabilityBounds& bounds,
                  std::vector<double> lambdas, double lambda_max,
                  double lambda_step) {
  if (lambdas.empty()) {
    if (lambda_step <= 0.0 || lambda_max < 0.0) {
      throw std::runtime_error(
          "topkcert: lambda step must be > 0 and max >= 0");
    }
    for (double l = 0.0; l <= lambda_max + 1e-12; l += lambda_step) {
      lambdas.push_back(l);
    }
  }

  // Certified radius from these bounds, in units of sigma: verdicts flip
  // from kept to ejected as lambda crosses this ratio.
  const RadiusCertificate cert =
      certify_from_bounds(bounds, flags.k, flags.sigma, 1e-9);
  const double ratio = cert.radius_lower / flags.sigma;

  OutputTarget target(flags.out);
  std::ostream& out = target.stream();
  out << "lambda,certified_radius_ratio,consistent,violated\n";
  for (double lambda : lambdas) {
    const WorstCaseClassifier classifier =
        construct_worst_case(bounds, flags.k, lambda);
    const ViolationReport report = verify_violation_report(
        classifier, bounds, flags.k, lambda, bounds.target_label);
    out << format_double(lambda) << ',' << format_double(ratio) << ','
        << (report.consistent ? 1 : 0) << ',' << (report.ejected ? 1 : 0)
        << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Certified top-k robustness under Gaussian randomized smoothing"};
  app.require_subcommand(1);

  GlobalFlags flags;
  app.add_option("--sigma", flags.sigma, "Gaussian noise standard deviation")
      ->check(CLI::PositiveNumber);
  app.add_option("--k", flags.k, "top-k set size")->check(CLI::PositiveNumber);
  app.add_option("--n", flags.n, "Monte Carlo samples per example")
      ->check(CLI::PositiveNumber);
  app.add_option("--alpha", flags.alpha, "per-example failure level");
  app.add_option("--mu", flags.mu, "radius bisection tolerance");
  app.add_option("--bound-method", flags.bound_method,
                 "probability bound estimator")
      ->check(CLI::IsMember({"binocp", "simuem"}));
  app.add_option("--seed", flags.seed, "run seed");
  app.add_option("--out", flags.out,
                 "output file (certify/predict/tightness) or prefix (curve); "
                 "default stdout");

  std::string dataset_path;
  std::vector<std::string> example_filter;
  int label_override = 0;

  CLI::App* certify_cmd =
      app.add_subcommand("certify", "certified radius per example");
  certify_cmd->fallthrough();
  certify_cmd->add_option("--dataset", dataset_path, "dataset JSON file")
      ->required();
  certify_cmd
      ->add_option("--examples", example_filter,
                   "comma-separated example ids (default: all)")
      ->delimiter(',');
  certify_cmd->add_option("--label", label_override,
                          "certify this label instead of each true label");

  CLI::App* predict_cmd =
      app.add_subcommand("predict", "abstaining top-k prediction per example");
  predict_cmd->fallthrough();
  predict_cmd->add_option("--dataset", dataset_path, "dataset JSON file")
      ->required();
  predict_cmd
      ->add_option("--examples", example_filter,
                   "comma-separated example ids (default: all)")
      ->delimiter(',');

  double rho = 1e-3;
  double grid_max = 2.0;
  double grid_step = 0.05;
  CLI::App* curve_cmd = app.add_subcommand(
      "curve", "certified accuracy curve over a radius grid");
  curve_cmd->fallthrough();
  curve_cmd->add_option("--dataset", dataset_path, "dataset JSON file")
      ->required();
  curve_cmd->add_option("--rho", rho, "curve-level failure budget");
  curve_cmd->add_option("--grid-max", grid_max, "largest grid radius");
  curve_cmd->add_option("--grid-step", grid_step, "grid spacing");

  std::string bounds_file;
  double lower = 0.0;
  std::vector<double> uppers;
  int target_label = 1;
  std::vector<double> lambdas;
  double lambda_max = 2.0;
  double lambda_step = 0.1;
  CLI::App* tightness_cmd = app.add_subcommand(
      "tightness", "worst-case classifier verdicts over a shift grid");
  tightness_cmd->fallthrough();
  tightness_cmd->add_option("--bounds-file", bounds_file,
                            "JSON {lower, uppers[], target_label?}");
  tightness_cmd->add_option("--lower", lower,
                            "lower bound on the target label");
  tightness_cmd
      ->add_option("--uppers", uppers,
                   "comma-separated upper bounds for the other labels")
      ->delimiter(',');
  tightness_cmd->add_option("--target-label", target_label,
                            "label the bounds protect");
  tightness_cmd
      ->add_option("--lambdas", lambdas,
                   "comma-separated shifts (units of sigma)")
      ->delimiter(',');
  tightness_cmd->add_option("--lambda-max", lambda_max,
                            "largest grid shift when --lambdas is absent");
  tightness_cmd->add_option("--lambda-step", lambda_step, "shift grid spacing");

  CLI11_PARSE(app, argc, argv);

  try {
    if (certify_cmd->parsed()) {
      return run_certify(flags, dataset_path, example_filter, label_override);
    }
    if (predict_cmd->parsed()) {
      return run_predict(flags, dataset_path, example_filter);
    }
    if (curve_cmd->parsed()) {
      return run_curve(flags, dataset_path, rho, grid_max, grid_step);
    }
    if (tightness_cmd->parsed()) {
      const ProbabilityBounds bounds =
          load_bounds(bounds_file, lower, uppers, target_label,
                      bound_method_from_string(flags.bound_method), flags.alpha);
      return run_tightness(flags, bounds, lambdas, lambda_max, lambda_step);
    }
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return 1;
  }
  return 0;
}
