#include "topkcert/smoothing.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>

#include "topkcert/special_functions.hpp"

namespace topkcert {

namespace {

[[noreturn]] void fail(const std::string& msg) {
  throw std::invalid_argument("topkcert: " + msg);
}

}  // namespace

namespace detail {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream * 0x9e3779b97f4a7c15ULL + 1));
}

double uniform01(std::uint64_t bits) noexcept {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace detail

NoiseModel::NoiseModel(double sigma) : sigma_(sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    fail("noise sigma must be positive and finite, got " + std::to_string(sigma));
  }
}

std::int64_t CountVector::total() const noexcept {
  return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
}

namespace {

constexpr std::int64_t kChunkSize = 16384;

// One chunk of the Monte Carlo pass, fully determined by its sub-seed.
CountVector sample_chunk(const BaseClassifier& classifier,
                         const ExamplePoint& point, double sigma,
                         std::int64_t count, std::uint64_t sub_seed) {
  const int c = classifier.label_count();
  CountVector out;
  out.counts.assign(static_cast<std::size_t>(c), 0);
  std::mt19937_64 rng(sub_seed);
  ExamplePoint perturbed(point.size());
  for (std::int64_t i = 0; i < count; ++i) {
    for (std::size_t d = 0; d < point.size(); ++d) {
      const double u = detail::uniform01(rng());
      perturbed[d] = point[d] + sigma * std_normal_quantile(u);
    }
    const Label label = classifier.classify(perturbed);
    if (label < 1 || label > c) {
      throw std::logic_error("topkcert: classifier returned label " +
                             std::to_string(label) + " outside [1, " +
                             std::to_string(c) + "]");
    }
    ++out.counts[static_cast<std::size_t>(label - 1)];
  }
  return out;
}

}  // namespace

CountVector sample_under_noise(const BaseClassifier& classifier,
                               const ExamplePoint& point,
                               const NoiseModel& noise, std::int64_t n,
                               std::uint64_t seed) {
  if (n < 1) fail("sample count must be >= 1");
  if (point.empty()) fail("example point must have dimension >= 1");
  for (double v : point) {
    if (!std::isfinite(v)) fail("example point has a non-finite coordinate");
  }

  const std::int64_t num_chunks = (n + kChunkSize - 1) / kChunkSize;
  std::vector<CountVector> partial(static_cast<std::size_t>(num_chunks));

  auto run_chunk = [&](std::int64_t chunk) {
    const std::int64_t begin = chunk * kChunkSize;
    const std::int64_t count = std::min(kChunkSize, n - begin);
    partial[static_cast<std::size_t>(chunk)] =
        sample_chunk(classifier, point, noise.sigma(), count,
                     detail::derive_seed(seed, static_cast<std::uint64_t>(chunk)));
  };

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (num_chunks > 1 && hw > 1) {
    std::atomic<std::int64_t> next{0};
    std::vector<std::thread> workers;
    const unsigned worker_count =
        std::min<std::uint64_t>(hw, static_cast<std::uint64_t>(num_chunks));
    workers.reserve(worker_count);
    for (unsigned w = 0; w < worker_count; ++w) {
      workers.emplace_back([&] {
        for (std::int64_t chunk = next.fetch_add(1); chunk < num_chunks;
             chunk = next.fetch_add(1)) {
          run_chunk(chunk);
        }
      });
    }
    for (auto& t : workers) t.join();
  } else {
    for (std::int64_t chunk = 0; chunk < num_chunks; ++chunk) run_chunk(chunk);
  }

  // Merge in chunk order; label-wise addition is associative, so the result
  // is independent of which thread ran which chunk.
  CountVector total;
  total.counts.assign(static_cast<std::size_t>(classifier.label_count()), 0);
  for (const CountVector& part : partial) {
    for (std::size_t i = 0; i < total.counts.size(); ++i) {
      total.counts[i] += part.counts[i];
    }
  }
  return total;
}

std::vector<Label> top_indices(const CountVector& counts, int m,
                               std::uint64_t seed) {
  const int c = counts.label_count();
  if (m < 1 || m > c) fail("top_indices needs 1 <= m <= label count");

  std::vector<Label> order(static_cast<std::size_t>(c));
  std::iota(order.begin(), order.end(), 1);
  // Shuffle first, then stable-sort by count: within every tied group the
  // shuffled order survives, giving a uniformly random tie-break.
  std::mt19937_64 rng(detail::splitmix64(seed));
  std::shuffle(order.begin(), order.end(), rng);
  std::stable_sort(order.begin(), order.end(), [&](Label a, Label b) {
    return counts.count_for(a) > counts.count_for(b);
  });
  order.resize(static_cast<std::size_t>(m));
  return order;
}

SyntheticTabularClassifier::SyntheticTabularClassifier(
    int label_count, std::vector<std::vector<double>> rows,
    const NoiseModel& noise, int dim, std::uint64_t label_seed)
    : label_count_(label_count),
      dim_(dim),
      spacing_(std::max(1.0, 40.0 * noise.sigma())),
      label_seed_(label_seed) {
  if (label_count < 2) fail("synthetic classifier needs >= 2 labels");
  if (dim < 1) fail("synthetic classifier needs dimension >= 1");
  if (rows.empty()) fail("synthetic classifier needs at least one row");
  cumulative_.reserve(rows.size());
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != label_count) {
      fail("probability row length does not match label count");
    }
    double sum = 0.0;
    std::vector<double> cdf(row.size());
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (!(row[i] >= 0.0) || row[i] > 1.0) {
        fail("probability row entries must lie in [0,1]");
      }
      sum += row[i];
      cdf[i] = sum;
    }
    if (std::fabs(sum - 1.0) > 1e-12) {
      fail("probability row sums to " + std::to_string(sum) + ", expected 1");
    }
    cdf.back() = 1.0;  // close the CDF against accumulated roundoff
    cumulative_.push_back(std::move(cdf));
  }
}

ExamplePoint SyntheticTabularClassifier::anchor(std::size_t row) const {
  if (row >= cumulative_.size()) {
    fail("anchor row index out of range");
  }
  ExamplePoint point(static_cast<std::size_t>(dim_), 0.0);
  point[0] = static_cast<double>(row) * spacing_;
  return point;
}

Label SyntheticTabularClassifier::classify(const ExamplePoint& point) const {
  if (static_cast<int>(point.size()) != dim_) {
    fail("example point dimension does not match classifier");
  }
  // Nearest anchor decides the row.
  const double pos = point[0] / spacing_;
  const auto row_index = static_cast<std::size_t>(std::clamp<double>(
      std::llround(pos), 0.0, static_cast<double>(cumulative_.size() - 1)));
  // Hash the full input into one uniform draw; identical inputs always get
  // identical labels, while noise-perturbed inputs behave as fresh draws
  // from the row's distribution.
  std::uint64_t h = detail::splitmix64(label_seed_ ^ 0x7c0f5edab4c9ULL);
  for (double coord : point) {
    h = detail::splitmix64(h ^ std::bit_cast<std::uint64_t>(coord));
  }
  const double u = detail::uniform01(h);
  const auto& cdf = cumulative_[row_index];
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  const auto idx = std::min<std::size_t>(
      static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
  return static_cast<Label>(idx + 1);
}

}  // namespace topkcert
