#pragma once

// Moment machinery: graded-lex multi-index enumeration, empirical and exact
// reference moments, and the low-degree moment-matching test that gates the
// moment-based learners.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <variant>
#include <vector>

#include "tds/core.hpp"

namespace tds::moments {

struct StandardGaussian {
  int dim = 0;
};

struct UniformHypercube {
  int dim = 0;
};

// Reference whose moments are answered by dataset averages. Used for
// references without closed-form moments.
struct EmpiricalReference {
  Dataset data;
};

using ReferenceMarginal = std::variant<StandardGaussian, UniformHypercube, EmpiricalReference>;

inline int reference_dim(const ReferenceMarginal& d) {
  return std::visit(
      [](const auto& r) -> int {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, EmpiricalReference>) {
          return r.data.dim;
        } else {
          return r.dim;
        }
      },
      d);
}

// Number of multi-indices with ||alpha||_1 <= k in dimension d, i.e.
// C(d+k, k), computed in doubles with an infeasibility cap.
inline double multi_index_count(int d, int k) {
  double c = 1.0;
  for (int i = 1; i <= k; ++i) {
    c *= static_cast<double>(d + i) / static_cast<double>(i);
    if (c > 1e18) return c;  // already far past any usable size
  }
  return c;
}

namespace detail {

inline void enumerate_fixed_degree(int d, int remaining, int coord, MultiIndex& current,
                                   std::vector<MultiIndex>& out) {
  if (coord == d - 1) {
    current[coord] = remaining;
    out.push_back(current);
    current[coord] = 0;
    return;
  }
  for (int e = remaining; e >= 0; --e) {
    current[coord] = e;
    enumerate_fixed_degree(d, remaining - e, coord + 1, current, out);
  }
  current[coord] = 0;
}

}  // namespace detail

// All alpha with ||alpha||_1 <= k, each exactly once, in graded
// lexicographic order (by total degree, then first coordinate largest
// first). The fixed ordering makes moment reports diff cleanly across runs.
inline std::vector<MultiIndex> enumerate_multi_indices(int d, int k) {
  if (d < 1) throw std::invalid_argument("enumerate_multi_indices: d must be >= 1");
  if (k < 0) throw std::invalid_argument("enumerate_multi_indices: k must be >= 0");
  double count = multi_index_count(d, k);
  if (count > 1e7) {
    throw std::invalid_argument("enumerate_multi_indices: C(d+k,k) exceeds 1e7 cap");
  }
  std::vector<MultiIndex> out;
  out.reserve(static_cast<std::size_t>(count));
  MultiIndex current(d, 0);
  for (int deg = 0; deg <= k; ++deg) {
    detail::enumerate_fixed_degree(d, deg, 0, current, out);
  }
  return out;
}

// Accumulates in sorted order so that permuting the dataset's rows gives a
// bit-identical average.
inline double empirical_moment(const Dataset& x, const MultiIndex& alpha) {
  if (x.empty()) throw std::invalid_argument("empirical_moment: empty dataset");
  if (static_cast<int>(alpha.size()) != x.dim) {
    throw std::invalid_argument("empirical_moment: multi-index dimension mismatch");
  }
  std::vector<double> values;
  values.reserve(x.size());
  for (const Point& p : x.points) values.push_back(monomial_value(p, alpha));
  std::sort(values.begin(), values.end());
  double acc = 0.0;
  for (double v : values) acc += v;
  return acc / static_cast<double>(x.size());
}

// (a-1)!! for even a; the iterative product overflows past a ~ 300 so we
// guard there rather than return junk.
inline double gaussian_univariate_moment(int a) {
  if (a < 0) throw std::invalid_argument("gaussian moment: negative exponent");
  if (a % 2 == 1) return 0.0;
  if (a > 300) throw std::invalid_argument("gaussian moment: exponent cap (300) exceeded");
  double v = 1.0;
  for (int m = a - 1; m >= 2; m -= 2) v *= static_cast<double>(m);
  return v;
}

inline double reference_moment(const ReferenceMarginal& d, const MultiIndex& alpha) {
  return std::visit(
      [&alpha](const auto& r) -> double {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, StandardGaussian>) {
          if (static_cast<int>(alpha.size()) != r.dim) {
            throw std::invalid_argument("reference_moment: dimension mismatch");
          }
          double v = 1.0;
          for (int e : alpha) {
            v *= gaussian_univariate_moment(e);
            if (v == 0.0) return 0.0;
          }
          return v;
        } else if constexpr (std::is_same_v<T, UniformHypercube>) {
          if (static_cast<int>(alpha.size()) != r.dim) {
            throw std::invalid_argument("reference_moment: dimension mismatch");
          }
          for (int e : alpha) {
            if (e < 0) throw std::invalid_argument("reference_moment: negative exponent");
            if (e % 2 == 1) return 0.0;
          }
          return 1.0;
        } else {
          return empirical_moment(r.data, alpha);
        }
      },
      d);
}

struct MomentRecord {
  MultiIndex alpha;
  double empirical = 0.0;
  double reference = 0.0;
  double gap = 0.0;  // empirical - reference
};

struct MomentReport {
  std::vector<MomentRecord> records;
  double worst_gap = 0.0;     // max |gap|
  MultiIndex worst_alpha;     // first maximizer in graded-lex order
};

struct MomentTestResult {
  bool pass = false;
  MomentReport report;
};

// Passes iff every moment up to the given total degree matches the
// reference within delta. The report is returned either way.
inline MomentTestResult moment_match_test(const Dataset& x, const ReferenceMarginal& d,
                                          int degree, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("moment_match_test: delta must be > 0");
  if (x.dim != reference_dim(d)) {
    throw std::invalid_argument("moment_match_test: dataset/reference dimension mismatch");
  }
  MomentTestResult result;
  result.pass = true;
  auto alphas = enumerate_multi_indices(x.dim, degree);
  result.report.records.reserve(alphas.size());
  for (auto& alpha : alphas) {
    MomentRecord rec;
    rec.empirical = empirical_moment(x, alpha);
    rec.reference = reference_moment(d, alpha);
    rec.gap = rec.empirical - rec.reference;
    double mag = std::abs(rec.gap);
    if (mag > result.report.worst_gap) {
      result.report.worst_gap = mag;
      result.report.worst_alpha = alpha;
    }
    if (mag > delta) result.pass = false;
    rec.alpha = std::move(alpha);
    result.report.records.push_back(std::move(rec));
  }
  if (result.report.worst_alpha.empty() && !result.report.records.empty()) {
    result.report.worst_alpha = result.report.records.front().alpha;
  }
  return result;
}

// Moment tolerance eps' / (B^2 d^(4k)). Values below 1e-12 are smaller than
// the rounding noise of an empirical moment in doubles, so no desk-scale
// sample could ever certify them; they are flagged instead of returned.
inline double default_delta(double eps_prime, double b, int d, int k) {
  if (!(eps_prime > 0.0) || !(b > 0.0) || d < 1 || k < 0) {
    throw std::invalid_argument("default_delta: arguments must be positive");
  }
  double denom = b * b * std::pow(static_cast<double>(d), 4.0 * static_cast<double>(k));
  double delta = eps_prime / denom;
  if (!(delta >= 1e-12)) {
    throw StrictnessInfeasibleError("default_delta: tolerance below desk-scale resolution");
  }
  return delta;
}

}  // namespace tds::moments
