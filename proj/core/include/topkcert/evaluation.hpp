#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "topkcert/radius_solver.hpp"
#include "topkcert/smoothing.hpp"

// Batch evaluation over a synthetic dataset: certify every example, turn the
// certificates into an approximate certified top-k accuracy curve over a
// radius grid, and attach the high-probability lower bound that corrects the
// curve for the per-example abstention/error rate alpha.

namespace topkcert {

// One dataset row: a known label distribution under noise plus the label the
// certificate should protect. true_label = 0 means "not provided".
struct DatasetExample {
  std::string id;
  int true_label = 0;
  std::vector<double> probs;
};

struct SyntheticDataset {
  int label_count = 0;
  int dim = 1;
  std::uint64_t label_seed = 0;
  std::vector<DatasetExample> examples;
};

// Reads a dataset from a JSON file: {"label_count": c, "dim": d?,
// "label_seed": s?, "examples": [{"id": ..., "true_label": ...?,
// "probs": [...]}, ...]}. Validates shapes and probability rows.
SyntheticDataset load_dataset(const std::string& path);

struct EvaluationConfig {
  double sigma = 0.5;
  CertifyParams certify;                  // k, n, alpha, mu, method, seed
  std::vector<double> radius_grid;        // defaults to 0..2 step 0.05
  double rho = 1e-3;                      // failure budget of the lower bound
  std::string dataset_path;               // used by run_batch_to_files
};

struct ExampleResult {
  std::string id;
  int true_label = 0;
  Label certified_label = 0;
  RadiusCertificate certificate;
};

struct CurvePoint {
  double radius = 0.0;
  double approx_accuracy = 0.0;  // fraction certified at or beyond radius
  double lower_bound = 0.0;      // corrected bound; may be negative
};

struct AccuracyCurve {
  std::vector<CurvePoint> points;
};

// Evenly spaced radii 0, 0.05, ..., 2.0.
std::vector<double> default_radius_grid();

// High-probability lower bound on the certified top-k accuracy from
// approx_count certificate successes over m examples, with per-example
// failure level alpha and overall failure budget rho:
//   (approx_count/m - alpha - sqrt(2 alpha (1-alpha) ln(1/rho) / m)
//                  - ln(1/rho) / (3m)) / (1 - alpha).
// The value may be negative; clamp only for display.
double accuracy_lower_bound(std::int64_t m, std::int64_t approx_count,
                            double alpha, double rho);

// Counts, at every grid radius, the examples holding a non-abstained
// certificate for their true label with radius_lower at or beyond the grid
// radius, and pairs each point with the corrected lower bound. The grid must
// be sorted ascending; the approximate accuracy is non-increasing in the
// radius by construction.
AccuracyCurve certified_accuracy_curve(const std::vector<ExampleResult>& results,
                                       const std::vector<double>& radius_grid,
                                       double alpha, double rho);

// Certifies every example of the dataset (optionally restricted to the ids
// in `only`, and with `label_override` > 0 replacing each example's true
// label as certification target). Per-example seeds derive from the run
// seed and the example index, so results do not depend on thread count or
// example subset order.
std::vector<ExampleResult> run_batch(const SyntheticDataset& dataset,
                                     const EvaluationConfig& config,
                                     const std::vector<std::string>& only = {},
                                     Label label_override = 0);

// CSV writers. Rerunning with the same configuration reproduces the files
// byte for byte.
void write_results_csv(std::ostream& out,
                       const std::vector<ExampleResult>& results,
                       const EvaluationConfig& config);
void write_curve_csv(std::ostream& out, const AccuracyCurve& curve);
// Sidecar run description (parameters, sample counts, RNG identifier).
void write_run_metadata(std::ostream& out, const EvaluationConfig& config,
                        std::size_t example_count);

struct BatchOutput {
  std::vector<ExampleResult> results;
  AccuracyCurve curve;
};

// Loads config.dataset_path, certifies every example, and writes
// <out_prefix>.results.csv, <out_prefix>.curve.csv and <out_prefix>.meta.json.
// I/O failures are reported with the file name and cause.
BatchOutput run_batch_to_files(const EvaluationConfig& config,
                               const std::string& out_prefix);

}  // namespace topkcert
