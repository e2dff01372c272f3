#pragma once

// Independent brute-force validators: exact hypercube expectations,
// Monte-Carlo estimates with Hoeffding intervals, exact 2-D discrepancy
// distance for origin-centered halfspaces, and grid-based Rademacher
// estimates.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "tds/core.hpp"
#include "tds/halfspaces.hpp"
#include "tds/scenarios.hpp"

namespace tds::oracle {

using PointFunction = std::function<double(const Point&)>;

// Uniform average of g over all 2^d hypercube vertices.
inline double exact_cube_expectation(const PointFunction& g, int d) {
  if (d < 1 || d > 16) throw std::invalid_argument("exact_cube_expectation: need 1 <= d <= 16");
  const long vertices = 1L << d;
  double acc = 0.0;
  Point x(static_cast<std::size_t>(d));
  for (long v = 0; v < vertices; ++v) {
    for (int i = 0; i < d; ++i) x[static_cast<std::size_t>(i)] = (v >> i) & 1 ? 1.0 : -1.0;
    acc += g(x);
  }
  return acc / static_cast<double>(vertices);
}

struct McEstimate {
  double estimate = 0.0;
  double half_width = 0.0;  // Hoeffding, for |g| <= declared bound
};

// Seeded Monte-Carlo mean of g with a Hoeffding half-width
// M sqrt(ln(2/delta) / (2n)). The bound M must be declared and honored; a
// sampled |g| above M means the declaration was wrong and is rejected.
inline McEstimate mc_estimate(const PointFunction& g, double bound, const scenarios::MarginalSpec& spec,
                              int n, double delta, Rng rng) {
  if (!(bound > 0.0) || !std::isfinite(bound)) {
    throw std::invalid_argument("mc_estimate: needs a finite positive bound on |g|");
  }
  if (n < 1) throw std::invalid_argument("mc_estimate: n must be >= 1");
  if (!(delta > 0.0) || delta >= 1.0) throw std::invalid_argument("mc_estimate: delta in (0,1)");
  Dataset x = scenarios::sample_marginal(spec, n, rng);
  double acc = 0.0;
  for (const Point& p : x.points) {
    double v = g(p);
    if (!(std::abs(v) <= bound)) {
      throw std::invalid_argument("mc_estimate: sampled |g| exceeds the declared bound");
    }
    acc += v;
  }
  McEstimate out;
  out.estimate = acc / static_cast<double>(n);
  out.half_width = bound * std::sqrt(std::log(2.0 / delta) / (2.0 * static_cast<double>(n)));
  return out;
}

namespace detail {

// Reduces a 2-D sample to directions mod pi. Points at the origin are
// classified +1 by every origin-centered halfspace, so they never enter a
// disagreement set; they stay in the denominator.
struct CircularSample {
  std::vector<double> angles;  // sorted, in [0, pi)
  double covered = 0.0;        // fraction of points off the origin
};

inline CircularSample circularize(const Dataset& x) {
  if (x.dim != 2) throw std::invalid_argument("discrepancy: datasets must be 2-dimensional");
  if (x.empty()) throw std::invalid_argument("discrepancy: empty dataset");
  CircularSample c;
  for (const Point& p : x.points) {
    if (norm2(p) < 1e-300) continue;
    double a = std::atan2(p[1], p[0]);
    while (a < 0.0) a += halfspaces::kPi;
    while (a >= halfspaces::kPi) a -= halfspaces::kPi;
    c.angles.push_back(a);
  }
  std::sort(c.angles.begin(), c.angles.end());
  c.covered = static_cast<double>(c.angles.size()) / static_cast<double>(x.size());
  return c;
}

// Fraction of the dataset with direction strictly below t.
inline double cdf_strict(const CircularSample& c, double t, std::size_t total) {
  auto it = std::lower_bound(c.angles.begin(), c.angles.end(), t);
  return static_cast<double>(it - c.angles.begin()) / static_cast<double>(total);
}

// Fraction with direction <= t.
inline double cdf_inclusive(const CircularSample& c, double t, std::size_t total) {
  auto it = std::upper_bound(c.angles.begin(), c.angles.end(), t);
  return static_cast<double>(it - c.angles.begin()) / static_cast<double>(total);
}

}  // namespace detail

// Exact discrepancy distance between two 2-D samples over origin-centered
// halfspaces. The disagreement set of a halfspace pair is a double wedge,
// i.e. an arc of the direction circle (circumference pi), so the supremum
// runs over arcs whose endpoints sit just below or just above sample
// directions. Unrolling the circle once turns every arc of length < pi
// into a difference of the direction-CDF gap D at two evaluation
// positions at most pi apart; the full circle contributes |cov1 - cov2|.
inline double discrepancy_2d_homogeneous(const Dataset& x1, const Dataset& x2) {
  if (x1.size() + x2.size() > 5000) {
    throw std::invalid_argument("discrepancy: combined sample size cap (5000) exceeded");
  }
  auto c1 = detail::circularize(x1);
  auto c2 = detail::circularize(x2);
  const double dcov = c1.covered - c2.covered;

  std::vector<double> cuts;  // distinct sample directions
  cuts.reserve(c1.angles.size() + c2.angles.size());
  cuts.insert(cuts.end(), c1.angles.begin(), c1.angles.end());
  cuts.insert(cuts.end(), c2.angles.begin(), c2.angles.end());
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  // Evaluation positions: just below (strict) and just above (inclusive)
  // each cut, then the same once more shifted by pi with D offset by the
  // coverage gap.
  struct Position {
    double angle = 0.0;
    bool above = false;  // endpoint lies just above the angle
    double value = 0.0;  // D at that endpoint
  };
  std::vector<Position> base;
  base.push_back({0.0, false, 0.0});
  for (double t : cuts) {
    base.push_back({t, false,
                    detail::cdf_strict(c1, t, x1.size()) - detail::cdf_strict(c2, t, x2.size())});
    base.push_back({t, true, detail::cdf_inclusive(c1, t, x1.size()) -
                                 detail::cdf_inclusive(c2, t, x2.size())});
  }
  std::vector<Position> extended = base;
  for (const Position& p : base) {
    extended.push_back({p.angle + halfspaces::kPi, p.above, p.value + dcov});
  }

  // Arc [u, w) is admissible when its length is positive and below pi;
  // endpoints at equal shifted angle still qualify when u sits above its
  // cut and w below its own (length just under pi).
  auto admissible = [](const Position& u, const Position& w) {
    double span = w.angle - u.angle;
    if (span < -1e-15) return false;
    if (span < halfspaces::kPi - 1e-15) return true;
    if (span > halfspaces::kPi + 1e-15) return false;
    return u.above && !w.above;
  };

  double best = std::abs(dcov);  // full circle
  for (const Position& u : base) {
    for (const Position& w : extended) {
      if (!admissible(u, w)) continue;
      best = std::max(best, std::abs(w.value - u.value));
    }
  }
  return best;
}

// Independent brute-force oracle for the sweep: evaluates every arc with
// endpoints on a fixed angular grid directly, including wrap-around arcs
// and the full circle.
inline double discrepancy_2d_grid(const Dataset& x1, const Dataset& x2, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("discrepancy grid: step must be > 0");
  auto c1 = detail::circularize(x1);
  auto c2 = detail::circularize(x2);
  const int cells = static_cast<int>(std::ceil(halfspaces::kPi / step));
  std::vector<double> f1(static_cast<std::size_t>(cells)), f2(f1.size());
  for (int i = 0; i < cells; ++i) {
    double t = static_cast<double>(i) * step;
    f1[static_cast<std::size_t>(i)] = detail::cdf_strict(c1, t, x1.size());
    f2[static_cast<std::size_t>(i)] = detail::cdf_strict(c2, t, x2.size());
  }
  double best = std::abs(c1.covered - c2.covered);  // full-circle arc
  for (int i = 0; i < cells; ++i) {
    for (int j = 0; j < cells; ++j) {
      if (i == j) continue;
      double p1 = 0.0;
      double p2 = 0.0;
      if (i < j) {  // arc [t_i, t_j)
        p1 = f1[static_cast<std::size_t>(j)] - f1[static_cast<std::size_t>(i)];
        p2 = f2[static_cast<std::size_t>(j)] - f2[static_cast<std::size_t>(i)];
      } else {  // wrap-around arc [t_i, pi) u [0, t_j)
        p1 = c1.covered - f1[static_cast<std::size_t>(i)] + f1[static_cast<std::size_t>(j)];
        p2 = c2.covered - f2[static_cast<std::size_t>(i)] + f2[static_cast<std::size_t>(j)];
      }
      best = std::max(best, std::abs(p1 - p2));
    }
  }
  return best;
}

// Empirical Rademacher complexity lower estimate: averages, over sign
// draws, (2/m) times the best signed sum achieved on a finite concept
// grid. Biased low by construction since the grid under-covers the class.
inline double rademacher_estimate(const Dataset& x, const std::vector<scenarios::Classifier>& grid,
                                  int trials, Rng rng) {
  if (x.empty()) throw std::invalid_argument("rademacher_estimate: empty dataset");
  if (grid.empty()) throw std::invalid_argument("rademacher_estimate: empty grid");
  if (trials < 1) throw std::invalid_argument("rademacher_estimate: trials must be >= 1");
  const std::size_t m = x.size();
  std::vector<std::vector<int>> values(grid.size(), std::vector<int>(m));
  for (std::size_t f = 0; f < grid.size(); ++f) {
    for (std::size_t j = 0; j < m; ++j) values[f][j] = grid[f](x.points[j]);
  }
  double acc = 0.0;
  std::vector<int> sigma(m);
  for (int t = 0; t < trials; ++t) {
    for (std::size_t j = 0; j < m; ++j) sigma[j] = rng.pm1();
    long best = std::numeric_limits<long>::min();
    for (const auto& row : values) {
      long sum = 0;
      for (std::size_t j = 0; j < m; ++j) sum += sigma[j] * row[j];
      best = std::max(best, sum);
    }
    acc += 2.0 * static_cast<double>(best) / static_cast<double>(m);
  }
  return acc / static_cast<double>(trials);
}

}  // namespace tds::oracle
