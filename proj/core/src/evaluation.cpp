#include "topkcert/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <thread>
#include <unordered_set>

#include <json.hpp>

namespace topkcert {

namespace {

[[noreturn]] void fail(const std::string& msg) {
  throw std::invalid_argument("topkcert: " + msg);
}

// Canonical number formatting so that reruns are byte-identical.
std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

constexpr const char* kRngIdentifier = "mt19937_64/inverse-cdf-normal";

}  // namespace

SyntheticDataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open dataset file '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    fail("dataset file '" + path + "' is not valid JSON: " + e.what());
  }

  SyntheticDataset dataset;
  dataset.label_count = doc.at("label_count").get<int>();
  if (dataset.label_count < 2) fail("dataset needs label_count >= 2");
  dataset.dim = doc.value("dim", 1);
  if (dataset.dim < 1) fail("dataset dim must be >= 1");
  dataset.label_seed = doc.value("label_seed", std::uint64_t{0});

  const auto& examples = doc.at("examples");
  if (!examples.is_array() || examples.empty()) {
    fail("dataset needs a non-empty examples array");
  }
  dataset.examples.reserve(examples.size());
  for (const auto& entry : examples) {
    DatasetExample example;
    example.id = entry.at("id").get<std::string>();
    example.true_label = entry.value("true_label", 0);
    if (example.true_label != 0 &&
        (example.true_label < 1 || example.true_label > dataset.label_count)) {
      fail("example '" + example.id + "' has true_label outside [1, c]");
    }
    example.probs = entry.at("probs").get<std::vector<double>>();
    if (static_cast<int>(example.probs.size()) != dataset.label_count) {
      fail("example '" + example.id + "' probability row has wrong length");
    }
    dataset.examples.push_back(std::move(example));
  }
  return dataset;
}

std::vector<double> default_radius_grid() {
  std::vector<double> grid;
  grid.reserve(41);
  for (int i = 0; i <= 40; ++i) grid.push_back(0.05 * i);
  return grid;
}

double accuracy_lower_bound(std::int64_t m, std::int64_t approx_count,
                            double alpha, double rho) {
  if (m < 1) fail("accuracy bound needs m >= 1");
  if (approx_count < 0 || approx_count > m) {
    fail("approx_count must lie in [0, m]");
  }
  if (!(alpha >= 0.0 && alpha < 1.0)) fail("alpha must lie in [0,1)");
  if (!(rho > 0.0 && rho < 1.0)) fail("rho must lie in (0,1)");

  const double md = static_cast<double>(m);
  const double approx = static_cast<double>(approx_count) / md;
  const double log_term = std::log(1.0 / rho);
  return (approx - alpha - std::sqrt(2.0 * alpha * (1.0 - alpha) * log_term / md) -
          log_term / (3.0 * md)) /
         (1.0 - alpha);
}

AccuracyCurve certified_accuracy_curve(const std::vector<ExampleResult>& results,
                                       const std::vector<double>& radius_grid,
                                       double alpha, double rho) {
  if (results.empty()) fail("accuracy curve needs at least one result");
  const auto m = static_cast<std::int64_t>(results.size());

  AccuracyCurve curve;
  curve.points.reserve(radius_grid.size());
  double previous = -1.0;
  for (double radius : radius_grid) {
    if (!(radius >= 0.0)) fail("radius grid entries must be >= 0");
    if (radius < previous) fail("radius grid must be sorted ascending");
    previous = radius;
    std::int64_t certified = 0;
    for (const ExampleResult& r : results) {
      if (!r.certificate.abstained && r.certified_label == r.true_label &&
          r.certificate.radius_lower >= radius) {
        ++certified;
      }
    }
    CurvePoint point;
    point.radius = radius;
    point.approx_accuracy = static_cast<double>(certified) / static_cast<double>(m);
    point.lower_bound = accuracy_lower_bound(m, certified, alpha, rho);
    curve.points.push_back(point);
  }
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    if (curve.points[i].approx_accuracy > curve.points[i - 1].approx_accuracy) {
      throw std::logic_error("topkcert: accuracy curve is not non-increasing");
    }
  }
  return curve;
}

std::vector<ExampleResult> run_batch(const SyntheticDataset& dataset,
                                     const EvaluationConfig& config,
                                     const std::vector<std::string>& only,
                                     Label label_override) {
  const NoiseModel noise(config.sigma);
  std::vector<std::vector<double>> rows;
  rows.reserve(dataset.examples.size());
  for (const DatasetExample& example : dataset.examples) {
    rows.push_back(example.probs);
  }
  const SyntheticTabularClassifier classifier(dataset.label_count, rows, noise,
                                              dataset.dim, dataset.label_seed);

  const std::unordered_set<std::string> filter(only.begin(), only.end());
  std::vector<std::size_t> selected;
  for (std::size_t i = 0; i < dataset.examples.size(); ++i) {
    if (filter.empty() || filter.count(dataset.examples[i].id) > 0) {
      selected.push_back(i);
    }
  }
  if (selected.empty()) fail("no dataset examples selected");

  std::vector<ExampleResult> results(selected.size());
  auto run_one = [&](std::size_t pos) {
    const std::size_t index = selected[pos];
    const DatasetExample& example = dataset.examples[index];
    const Label target =
        label_override > 0 ? label_override : example.true_label;
    if (target < 1 || target > dataset.label_count) {
      fail("example '" + example.id +
           "' has no true label and no override was given");
    }
    // Seeds depend on the example's dataset position, not on the selection,
    // so certifying a subset reproduces the full run's numbers.
    CertifyParams params = config.certify;
    params.seed = detail::derive_seed(config.certify.seed, index);
    ExampleResult result;
    result.id = example.id;
    result.true_label = example.true_label;
    result.certified_label = target;
    result.certificate =
        certify(classifier, classifier.anchor(index), target, noise, params);
    results[pos] = std::move(result);
  };

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (selected.size() > 1 && hw > 1) {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    const std::size_t worker_count = std::min<std::size_t>(hw, selected.size());
    workers.reserve(worker_count);
    for (std::size_t w = 0; w < worker_count; ++w) {
      workers.emplace_back([&] {
        for (std::size_t pos = next.fetch_add(1); pos < selected.size();
             pos = next.fetch_add(1)) {
          run_one(pos);
        }
      });
    }
    for (auto& t : workers) t.join();
  } else {
    for (std::size_t pos = 0; pos < selected.size(); ++pos) run_one(pos);
  }
  return results;
}

void write_results_csv(std::ostream& out,
                       const std::vector<ExampleResult>& results,
                       const EvaluationConfig& config) {
  out << "example_id,true_label,abstained,radius_lower,best_t,n,method\n";
  for (const ExampleResult& r : results) {
    out << r.id << ',' << r.true_label << ','
        << (r.certificate.abstained ? 1 : 0) << ',';
    if (!r.certificate.abstained) {
      out << format_double(r.certificate.radius_lower);
    }
    out << ',' << r.certificate.best_t << ',' << config.certify.n << ','
        << to_string(config.certify.method) << '\n';
  }
}

void write_curve_csv(std::ostream& out, const AccuracyCurve& curve) {
  out << "radius,approx_certified_topk_accuracy,lemma8_lower_bound\n";
  for (const CurvePoint& point : curve.points) {
    // The corrected bound can dip below zero; clamp in this plot-ready file.
    out << format_double(point.radius) << ','
        << format_double(point.approx_accuracy) << ','
        << format_double(std::max(0.0, point.lower_bound)) << '\n';
  }
}

BatchOutput run_batch_to_files(const EvaluationConfig& config,
                               const std::string& out_prefix) {
  const SyntheticDataset dataset = load_dataset(config.dataset_path);

  BatchOutput output;
  output.results = run_batch(dataset, config);
  const std::vector<double>& grid =
      config.radius_grid.empty() ? default_radius_grid() : config.radius_grid;
  output.curve = certified_accuracy_curve(output.results, grid,
                                          config.certify.alpha, config.rho);

  auto open_out = [](const std::string& path) {
    std::ofstream out(path);
    if (!out) fail("cannot open output file '" + path + "' for writing");
    return out;
  };
  {
    std::ofstream out = open_out(out_prefix + ".results.csv");
    write_results_csv(out, output.results, config);
  }
  {
    std::ofstream out = open_out(out_prefix + ".curve.csv");
    write_curve_csv(out, output.curve);
  }
  {
    std::ofstream out = open_out(out_prefix + ".meta.json");
    write_run_metadata(out, config, output.results.size());
  }
  return output;
}

void write_run_metadata(std::ostream& out, const EvaluationConfig& config,
                        std::size_t example_count) {
  nlohmann::json meta;
  meta["sigma"] = config.sigma;
  meta["k"] = config.certify.k;
  meta["n"] = config.certify.n;
  meta["alpha"] = config.certify.alpha;
  meta["mu"] = config.certify.mu;
  meta["bound_method"] = to_string(config.certify.method);
  meta["seed"] = config.certify.seed;
  meta["rho"] = config.rho;
  meta["examples"] = example_count;
  meta["rng"] = kRngIdentifier;
  out << meta.dump(2) << '\n';
}

}  // namespace topkcert
