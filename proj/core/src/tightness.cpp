#include "topkcert/tightness.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "topkcert/special_functions.hpp"

namespace topkcert {

namespace {

[[noreturn]] void fail(const std::string& msg) {
  throw std::invalid_argument("topkcert: " + msg);
}

}  // namespace

// ---------------------------------------------------------------------------
// QuantileIntervalSet

QuantileIntervalSet QuantileIntervalSet::interval(double lo, double hi) {
  QuantileIntervalSet out;
  out.add(lo, hi);
  return out;
}

void QuantileIntervalSet::add(double lo, double hi) {
  if (!(lo >= 0.0) || !(hi <= 1.0)) {
    fail("quantile interval endpoints must lie in [0,1]");
  }
  if (!(hi > lo)) return;  // empty or degenerate sliver
  intervals_.push_back({lo, hi});
  std::sort(intervals_.begin(), intervals_.end(),
            [](const QuantileInterval& a, const QuantileInterval& b) {
              return a.lo < b.lo;
            });
  // Merge overlaps and exact adjacencies back into canonical form.
  std::vector<QuantileInterval> merged;
  merged.reserve(intervals_.size());
  for (const QuantileInterval& seg : intervals_) {
    if (!merged.empty() && seg.lo <= merged.back().hi) {
      merged.back().hi = std::max(merged.back().hi, seg.hi);
    } else {
      merged.push_back(seg);
    }
  }
  intervals_ = std::move(merged);
}

double QuantileIntervalSet::clean_measure() const noexcept {
  double total = 0.0;
  for (const QuantileInterval& seg : intervals_) total += seg.hi - seg.lo;
  return total;
}

double QuantileIntervalSet::shifted_measure(double lambda) const {
  if (!std::isfinite(lambda)) fail("shift lambda must be finite");
  if (lambda == 0.0) return clean_measure();  // exact, no quantile round trip
  double total = 0.0;
  for (const QuantileInterval& seg : intervals_) {
    total += std_normal_cdf(std_normal_quantile(seg.hi) - lambda) -
             std_normal_cdf(std_normal_quantile(seg.lo) - lambda);
  }
  return total;
}

QuantileIntervalSet QuantileIntervalSet::clipped(double lo, double hi) const {
  QuantileIntervalSet out;
  for (const QuantileInterval& seg : intervals_) {
    out.add(std::max(seg.lo, lo), std::min(seg.hi, hi));
  }
  return out;
}

QuantileIntervalSet QuantileIntervalSet::minus(
    const QuantileIntervalSet& other) const {
  QuantileIntervalSet out;
  for (const QuantileInterval& seg : intervals_) {
    double lo = seg.lo;
    for (const QuantileInterval& cut : other.intervals_) {
      if (cut.hi <= lo) continue;
      if (cut.lo >= seg.hi) break;
      if (cut.lo > lo) out.add(lo, std::min(cut.lo, seg.hi));
      lo = std::max(lo, cut.hi);
      if (lo >= seg.hi) break;
    }
    if (lo < seg.hi) out.add(lo, seg.hi);
  }
  return out;
}

double QuantileIntervalSet::measure_below(double x) const noexcept {
  double total = 0.0;
  for (const QuantileInterval& seg : intervals_) {
    if (seg.lo >= x) break;
    total += std::min(seg.hi, x) - seg.lo;
  }
  return total;
}

double QuantileIntervalSet::position_at_measure(double measure) const noexcept {
  if (intervals_.empty()) return 0.0;
  if (measure <= 0.0) return intervals_.front().lo;
  double acc = 0.0;
  for (const QuantileInterval& seg : intervals_) {
    const double len = seg.hi - seg.lo;
    if (acc + len >= measure) return seg.lo + (measure - acc);
    acc += len;
  }
  return intervals_.back().hi;
}

// ---------------------------------------------------------------------------
// Worst-case construction

namespace {

constexpr double kFeasibilityTol = 1e-12;

// Carves the bottom slice of `from` holding `clean` of length.
QuantileIntervalSet carve_bottom(const QuantileIntervalSet& from, double clean) {
  if (from.empty()) return {};
  const double top = from.position_at_measure(clean);
  return from.clipped(from.intervals().front().lo, top);
}

// Carves a window (a, w] of `from` with clean measure `clean` whose shifted
// measure equals `shift_target`. Sliding the window upward moves the same
// clean mass into regions of larger shifted density, so the shifted measure
// is monotone in the window top and a bisection pins the equality. The clean
// measure is exact by construction: the bottom edge is recovered from the
// top edge by inverting the piecewise-linear length function of the set.
QuantileIntervalSet carve_window(const QuantileIntervalSet& from, double clean,
                                 double shift_target, double lambda) {
  if (from.empty()) return {};
  const double total = from.clean_measure();
  const double want = std::min(clean, total);
  const double bottom = from.intervals().front().lo;

  auto window_at = [&](double top) {
    const double a = from.position_at_measure(from.measure_below(top) - want);
    return from.clipped(a, top);
  };

  double lo = from.position_at_measure(want);   // lowest admissible top
  double hi = from.intervals().back().hi;       // highest admissible top
  if (window_at(lo).shifted_measure(lambda) >= shift_target) {
    return from.clipped(bottom, lo);
  }
  if (window_at(hi).shifted_measure(lambda) <= shift_target) {
    return window_at(hi);
  }
  while (true) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // bracket is one ulp wide
    if (window_at(mid).shifted_measure(lambda) < shift_target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return window_at(0.5 * (lo + hi));
}

struct Competitor {
  Label label = 0;
  double upper = 0.0;
};

}  // namespace

WorstCaseClassifier construct_worst_case(const ProbabilityBounds& bounds,
                                         int k, double lambda) {
  const int c = bounds.label_count();
  if (c < 2) fail("worst case needs at least two labels");
  if (bounds.target_label < 1 || bounds.target_label > c) {
    fail("target label out of range");
  }
  if (k < 1 || k > c - 1) fail("worst case needs 1 <= k <= label_count - 1");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    fail("shift lambda must be finite and >= 0");
  }
  if (!(bounds.lower >= 0.0 && bounds.lower <= 1.0)) {
    fail("lower bound outside [0,1]");
  }

  std::vector<Competitor> competitors;
  competitors.reserve(static_cast<std::size_t>(c - 1));
  double upper_sum = 0.0;
  for (Label i = 1; i <= c; ++i) {
    if (i == bounds.target_label) continue;
    const double u = bounds.upper_for(i);
    if (!(u >= 0.0 && u <= 1.0)) fail("upper bound outside [0,1]");
    competitors.push_back({i, u});
    upper_sum += u;
  }
  // Strongest first; equal uppers keep label order (the measures are the
  // same whichever equal value is picked).
  std::stable_sort(competitors.begin(), competitors.end(),
                   [](const Competitor& a, const Competitor& b) {
                     return a.upper > b.upper;
                   });

  // chosen[j] is b_{j+1}: the (j+1)-th smallest of the k strongest.
  std::vector<Competitor> chosen(competitors.begin(), competitors.begin() + k);
  std::reverse(chosen.begin(), chosen.end());
  std::vector<double> prefix(static_cast<std::size_t>(k) + 1, 0.0);
  for (int t = 1; t <= k; ++t) {
    prefix[static_cast<std::size_t>(t)] =
        prefix[static_cast<std::size_t>(t - 1)] +
        chosen[static_cast<std::size_t>(t - 1)].upper;
  }

  if (bounds.lower + prefix[static_cast<std::size_t>(k)] >
      1.0 + kFeasibilityTol) {
    fail("infeasible bounds: lower + sum of the k largest uppers = " +
         std::to_string(bounds.lower + prefix[static_cast<std::size_t>(k)]) +
         " exceeds 1");
  }
  if (bounds.lower + upper_sum < 1.0 - kFeasibilityTol) {
    fail("infeasible bounds: lower + sum of all uppers = " +
         std::to_string(bounds.lower + upper_sum) + " falls below 1");
  }

  // Critical share: the smallest shifted mass per label over the top-t
  // bands, the quantity the certified radius equates with the target's
  // shifted mass. Ties pick the smaller t.
  int tau = 1;
  double share = std::numeric_limits<double>::infinity();
  for (int t = 1; t <= k; ++t) {
    const double band_lo =
        std::max(0.0, 1.0 - prefix[static_cast<std::size_t>(t)]);
    const double mass =
        QuantileIntervalSet::interval(band_lo, 1.0).shifted_measure(lambda) /
        static_cast<double>(t);
    if (mass < share) {
      share = mass;
      tau = t;
    }
  }

  std::vector<QuantileIntervalSet> regions(static_cast<std::size_t>(c));
  regions[static_cast<std::size_t>(bounds.target_label - 1)] =
      QuantileIntervalSet::interval(0.0, bounds.lower);

  // The top band splits into tau pieces of equal shifted mass, one per
  // weakest competitor; carve from the strongest of them downward and hand
  // the forced remainder to b_1.
  QuantileIntervalSet top_band = QuantileIntervalSet::interval(
      std::max(0.0, 1.0 - prefix[static_cast<std::size_t>(tau)]), 1.0);
  for (int j = tau; j >= 2; --j) {
    const QuantileIntervalSet piece = carve_window(
        top_band, chosen[static_cast<std::size_t>(j - 1)].upper, share, lambda);
    regions[static_cast<std::size_t>(chosen[static_cast<std::size_t>(j - 1)]
                                         .label -
                                     1)] = piece;
    top_band = top_band.minus(piece);
  }
  regions[static_cast<std::size_t>(chosen[0].label - 1)] = top_band;

  // The next band covers the remaining strong competitors b_{tau+1}..b_k;
  // each needs at least the critical share. A bottom slice already above the
  // share is kept outright, otherwise the equality window is carved; the
  // forced remainder goes to b_{tau+1}.
  if (k > tau) {
    QuantileIntervalSet mid_band = QuantileIntervalSet::interval(
        std::max(0.0, 1.0 - prefix[static_cast<std::size_t>(k)]),
        std::max(0.0, 1.0 - prefix[static_cast<std::size_t>(tau)]));
    for (int j = k; j >= tau + 2; --j) {
      const double clean = chosen[static_cast<std::size_t>(j - 1)].upper;
      QuantileIntervalSet piece = carve_bottom(mid_band, clean);
      if (!(piece.shifted_measure(lambda) > share)) {
        piece = carve_window(mid_band, clean, share, lambda);
      }
      regions[static_cast<std::size_t>(chosen[static_cast<std::size_t>(j - 1)]
                                           .label -
                                       1)] = piece;
      mid_band = mid_band.minus(piece);
    }
    regions[static_cast<std::size_t>(chosen[static_cast<std::size_t>(tau)]
                                         .label -
                                     1)] = mid_band;
  }

  // Everyone else shares the band between the target's mass and the strong
  // competitors', greedily from the bottom; feasibility guarantees the
  // capacity suffices, so at most a 1e-12 sliver goes unassigned.
  QuantileIntervalSet leftover = QuantileIntervalSet::interval(
      std::min(bounds.lower, 1.0),
      std::max(0.0, 1.0 - prefix[static_cast<std::size_t>(k)]));
  for (std::size_t i = static_cast<std::size_t>(k); i < competitors.size();
       ++i) {
    if (leftover.empty()) break;
    const QuantileIntervalSet piece = carve_bottom(leftover, competitors[i].upper);
    regions[static_cast<std::size_t>(competitors[i].label - 1)] = piece;
    leftover = leftover.minus(piece);
  }

  WorstCaseClassifier out;
  out.target_label = bounds.target_label;
  out.regions = std::move(regions);
  return out;
}

ViolationReport verify_violation_report(const WorstCaseClassifier& classifier,
                                        const ProbabilityBounds& bounds, int k,
                                        double lambda, Label target) {
  const int c = bounds.label_count();
  if (static_cast<int>(classifier.regions.size()) != c) {
    fail("classifier and bounds disagree on label count");
  }
  if (target < 1 || target > c) fail("target label out of range");
  if (k < 1 || k > c - 1) fail("verify needs 1 <= k <= label_count - 1");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    fail("shift lambda must be finite and >= 0");
  }

  constexpr double tol = 1e-9;
  ViolationReport report;

  report.consistent =
      classifier.region_for(target).clean_measure() >= bounds.lower - tol;
  for (Label i = 1; i <= c && report.consistent; ++i) {
    if (i == target) continue;
    if (classifier.region_for(i).clean_measure() > bounds.upper_for(i) + tol) {
      report.consistent = false;
    }
  }

  std::vector<double> rival_mass;
  rival_mass.reserve(static_cast<std::size_t>(c - 1));
  for (Label i = 1; i <= c; ++i) {
    if (i == target) continue;
    rival_mass.push_back(classifier.region_for(i).shifted_measure(lambda));
  }
  std::nth_element(rival_mass.begin(), rival_mass.begin() + (k - 1),
                   rival_mass.end(), std::greater<double>());
  const double kth_strongest = rival_mass[static_cast<std::size_t>(k - 1)];
  report.ejected =
      classifier.region_for(target).shifted_measure(lambda) < kth_strongest;
  return report;
}

bool verify_violation(const WorstCaseClassifier& classifier,
                      const ProbabilityBounds& bounds, int k, double lambda,
                      Label target) {
  const ViolationReport report =
      verify_violation_report(classifier, bounds, k, lambda, target);
  return report.consistent && report.ejected;
}

}  // namespace topkcert
