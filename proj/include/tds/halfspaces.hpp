#pragma once

// Halfspace geometry and the halfspace learners: exact low-dimensional ERM,
// Chow-vector parameter recovery, band checks over test samples, the cap
// disagreement tester, and the three accept/reject learners built on them.

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "tds/core.hpp"
#include "tds/moments.hpp"

namespace tds::halfspaces {

inline constexpr double kPi = 3.14159265358979323846;

inline double angle(const std::vector<double>& v1, const std::vector<double>& v2) {
  if (v1.size() != v2.size()) throw std::invalid_argument("angle: dimension mismatch");
  double n1 = norm2(v1);
  double n2 = norm2(v2);
  if (n1 < 1e-12 || n2 < 1e-12) throw std::invalid_argument("angle: zero vector");
  double c = dot(v1, v2) / (n1 * n2);
  return std::acos(std::clamp(c, -1.0, 1.0));
}

// Disagreement mass of two origin-centered halfspaces under the standard
// Gaussian: exactly the angle between their normals over pi.
inline double gaussian_disagreement(const std::vector<double>& v1,
                                    const std::vector<double>& v2) {
  return angle(v1, v2) / kPi;
}

// Unit vector at exactly the requested angle from v, in a random plane.
inline std::vector<double> unit_at_angle(const std::vector<double>& v, double phi, Rng& rng) {
  const std::size_t d = v.size();
  if (d < 2) throw std::invalid_argument("unit_at_angle: needs dimension >= 2");
  std::vector<double> u(d);
  for (int tries = 0; tries < 64; ++tries) {
    for (double& c : u) c = rng.normal();
    double proj = dot(u, v);
    for (std::size_t i = 0; i < d; ++i) u[i] -= proj * v[i];
    double n = norm2(u);
    if (n > 1e-9) {
      for (double& c : u) c /= n;
      std::vector<double> out(d);
      for (std::size_t i = 0; i < d; ++i) out[i] = std::cos(phi) * v[i] + std::sin(phi) * u[i];
      return out;
    }
  }
  throw std::runtime_error("unit_at_angle: failed to draw an orthogonal direction");
}

// Normalized label-weighted mean of the sample. A vanishing sum means the
// labels carry no direction signal, which the callers treat as "the
// large-bias branch should have been taken".
inline std::vector<double> chow_direction(const LabeledDataset& s) {
  if (s.empty()) throw std::invalid_argument("chow_direction: empty dataset");
  std::vector<double> acc(static_cast<std::size_t>(s.dim), 0.0);
  for (const auto& e : s.examples) {
    for (std::size_t i = 0; i < acc.size(); ++i) {
      acc[i] += static_cast<double>(e.y) * e.x[i];
    }
  }
  double n = norm2(acc);
  if (n < 1e-12) throw DegenerateChowError("chow_direction: label-weighted sum is ~0");
  for (double& c : acc) c /= n;
  return acc;
}

// Best threshold among the projected sample values: tau minimizing the
// empirical error of sign(v.x - tau), ties broken toward the smallest tau.
// Linear sweep over the sorted projections.
inline double recover_offset(const LabeledDataset& s, const std::vector<double>& v_hat) {
  if (s.empty()) throw std::invalid_argument("recover_offset: empty dataset");
  std::vector<std::pair<double, int>> proj;
  proj.reserve(s.size());
  for (const auto& e : s.examples) proj.emplace_back(dot(v_hat, e.x), e.y);
  std::sort(proj.begin(), proj.end());

  long neg_total = 0;
  for (const auto& [p, y] : proj) {
    if (y < 0) ++neg_total;
  }

  double best_tau = proj.front().first;
  long best_err = -1;
  long pos_below = 0;
  long neg_below = 0;
  std::size_t i = 0;
  while (i < proj.size()) {
    double tau = proj[i].first;
    // err(tau): points with projection >= tau predicted +1, rest -1.
    long err = (neg_total - neg_below) + pos_below;
    if (best_err < 0 || err < best_err) {
      best_err = err;
      best_tau = tau;
    }
    while (i < proj.size() && proj[i].first == tau) {
      if (proj[i].second > 0) {
        ++pos_below;
      } else {
        ++neg_below;
      }
      ++i;
    }
  }
  return best_tau;
}

// ---------------------------------------------------------------------------
// Empirical risk minimization over origin-centered halfspaces

namespace detail {

inline long zero_one_errors(const LabeledDataset& s, const std::vector<double>& v) {
  long wrong = 0;
  for (const auto& e : s.examples) {
    if (sign_pm(dot(v, e.x)) != e.y) ++wrong;
  }
  return wrong;
}

// Exact ERM in the plane by sweeping the circle of normal directions.
// Every point toggles classification at exactly two critical angles; the
// sweep visits the critical angles and the open arcs between them.
inline std::vector<double> erm_exact_2d(const LabeledDataset& s) {
  long base_err = 0;  // points at the origin are always classified +1
  struct Event {
    std::vector<std::size_t> gains;  // become +1 at this angle (inclusive)
    std::vector<std::size_t> loses;  // become -1 just after this angle
  };
  std::map<double, Event> events;
  std::vector<double> gain_at(s.size(), 0.0);
  std::vector<double> lose_at(s.size(), 0.0);
  std::vector<bool> in_sweep(s.size(), false);
  auto wrap = [](double a) {
    while (a < 0.0) a += 2.0 * kPi;
    while (a >= 2.0 * kPi) a -= 2.0 * kPi;
    return a;
  };
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto& e = s.examples[i];
    if (norm2(e.x) < 1e-300) {
      if (e.y < 0) ++base_err;
      continue;
    }
    in_sweep[i] = true;
    double phi = std::atan2(e.x[1], e.x[0]);
    gain_at[i] = wrap(phi - kPi / 2.0);
    lose_at[i] = wrap(phi + kPi / 2.0);
    events[gain_at[i]].gains.push_back(i);
    events[lose_at[i]].loses.push_back(i);
  }
  if (events.empty()) return {1.0, 0.0};

  // Classification state at the first critical angle, decided by arc
  // membership on the stored event angles (consistent with the event map,
  // unlike re-evaluating dot products near their sign change).
  const double a0 = events.begin()->first;
  long err = base_err;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!in_sweep[i]) continue;
    bool positive = gain_at[i] <= lose_at[i]
                        ? (a0 >= gain_at[i] && a0 <= lose_at[i])
                        : (a0 >= gain_at[i] || a0 <= lose_at[i]);
    if ((positive ? +1 : -1) != s.examples[i].y) ++err;
  }

  double best_angle = a0;
  long best_err = err;
  auto consider = [&](double a, long e) {
    if (e < best_err) {
      best_err = e;
      best_angle = a;
    }
  };
  consider(a0, err);

  auto gain = [&](std::size_t i) { err += s.examples[i].y > 0 ? -1 : +1; };
  auto lose = [&](std::size_t i) { err += s.examples[i].y < 0 ? -1 : +1; };

  bool first = true;
  for (auto it = events.begin(); it != events.end(); ++it) {
    if (!first) {
      for (std::size_t i : it->second.gains) gain(i);
      consider(it->first, err);
    }
    first = false;
    for (std::size_t i : it->second.loses) lose(i);
    auto next = std::next(it);
    double next_angle = next == events.end() ? events.begin()->first + 2.0 * kPi : next->first;
    consider((it->first + next_angle) / 2.0, err);
  }
  return {std::cos(best_angle), std::sin(best_angle)};
}

inline std::vector<double> random_unit(int d, Rng& rng) {
  std::vector<double> v(static_cast<std::size_t>(d));
  double n = 0.0;
  do {
    for (double& c : v) c = rng.normal();
    n = norm2(v);
  } while (n < 1e-12);
  for (double& c : v) c /= n;
  return v;
}

inline std::vector<double> pocket_perceptron(const LabeledDataset& s, Rng& rng, int epochs) {
  std::vector<double> w = random_unit(s.dim, rng);
  std::vector<double> best = w;
  long best_err = zero_one_errors(s, w);
  for (int pass = 0; pass < epochs; ++pass) {
    for (const auto& e : s.examples) {
      if (sign_pm(dot(w, e.x)) != e.y) {
        for (std::size_t i = 0; i < w.size(); ++i) {
          w[i] += static_cast<double>(e.y) * e.x[i];
        }
      }
    }
    if (norm2(w) < 1e-12) w = random_unit(s.dim, rng);
    long err = zero_one_errors(s, w);
    if (err < best_err) {
      best_err = err;
      best = w;
    }
  }
  double n = norm2(best);
  for (double& c : best) c /= n;
  return best;
}

}  // namespace detail

// ERM over origin-centered halfspaces. Exact for d <= 3 (d = 2 by circular
// sweep; d = 3 by enumerating normals orthogonal to each sample pair, both
// orientations). For d > 3 the minimizer of a heuristic pool is returned:
// the Chow direction, 200 pocket-perceptron restarts, and 200 random
// perturbations of the best pool member.
inline std::vector<double> erm_homogeneous(const LabeledDataset& s, Rng rng) {
  if (s.empty()) throw std::invalid_argument("erm_homogeneous: empty dataset");
  const int d = s.dim;
  if (d == 1) {
    long err_plus = detail::zero_one_errors(s, {1.0});
    long err_minus = detail::zero_one_errors(s, {-1.0});
    return err_minus < err_plus ? std::vector<double>{-1.0} : std::vector<double>{1.0};
  }
  if (d == 2) return detail::erm_exact_2d(s);

  std::vector<std::vector<double>> pool;
  if (d == 3) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      for (std::size_t j = i + 1; j < s.size(); ++j) {
        const Point& a = s.examples[i].x;
        const Point& b = s.examples[j].x;
        std::vector<double> c{a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
                              a[0] * b[1] - a[1] * b[0]};
        double n = norm2(c);
        if (n < 1e-12) continue;
        for (double& e : c) e /= n;
        pool.push_back(c);
        std::vector<double> neg{-c[0], -c[1], -c[2]};
        pool.push_back(std::move(neg));
      }
    }
  }
  try {
    pool.push_back(chow_direction(s));
  } catch (const DegenerateChowError&) {
  }
  const int restarts = d > 3 ? 200 : 20;
  for (int r = 0; r < restarts; ++r) {
    pool.push_back(detail::pocket_perceptron(s, rng, 8));
  }
  if (pool.empty()) pool.push_back(detail::random_unit(d, rng));

  auto best = pool.front();
  long best_err = detail::zero_one_errors(s, best);
  for (const auto& cand : pool) {
    long err = detail::zero_one_errors(s, cand);
    if (err < best_err) {
      best_err = err;
      best = cand;
    }
  }
  if (d > 3) {
    const double sigmas[] = {0.01, 0.05, 0.2, 0.5};
    for (int r = 0; r < 200; ++r) {
      std::vector<double> cand = best;
      double sigma = sigmas[r % 4];
      for (double& c : cand) c += sigma * rng.normal();
      double n = norm2(cand);
      if (n < 1e-12) continue;
      for (double& c : cand) c /= n;
      long err = detail::zero_one_errors(s, cand);
      if (err < best_err) {
        best_err = err;
        best = cand;
      }
    }
  }
  return best;
}

// Fraction of test points inside the band |v.x - tau| <= width(x).
template <typename WidthFn>
double band_fraction(const Dataset& x, const std::vector<double>& v_hat, double tau,
                     WidthFn width) {
  if (x.empty()) throw std::invalid_argument("band_fraction: empty dataset");
  long inside = 0;
  for (const Point& p : x.points) {
    if (std::abs(dot(v_hat, p) - tau) <= width(p)) ++inside;
  }
  return static_cast<double>(inside) / static_cast<double>(x.size());
}

// ---------------------------------------------------------------------------
// Cap disagreement tester (stand-in)
//
// Checks the empirical mass of shrinking angular bands around v's
// hyperplane. After a pass, every v2 within angle theta of v satisfies
//   Pr_X[sign(v.x) != sign(v2.x)] <= C*angle(v,v2) + eps_add + residual,
// where residual is the innermost band's mass: the disagreement event is
// contained in the band of width sin(angle)||x||, and the power-of-two grid
// rounds the band up by at most a factor 2 (absorbed by testing C/2 per
// level).

struct CapTesterConfig {
  double theta = 0.0;   // in (0, pi/4]
  int grid_levels = 6;  // J >= 1
  double c = 4.0;
  double eps_add = 0.01;
};

struct CapLevelRecord {
  double phi = 0.0;
  double band_fraction = 0.0;
  double bound = 0.0;
  bool ok = false;
};

struct CapTesterResult {
  bool pass = false;
  std::vector<CapLevelRecord> levels;
  double residual = 0.0;  // innermost band fraction
};

inline CapTesterResult cap_disagreement_tester(const Dataset& x,
                                               const std::vector<double>& v_hat,
                                               const CapTesterConfig& cfg) {
  if (!(cfg.theta > 0.0) || cfg.theta > kPi / 4.0 + 1e-12) {
    throw std::invalid_argument("cap tester: theta must lie in (0, pi/4]");
  }
  if (cfg.grid_levels < 1) throw std::invalid_argument("cap tester: need grid_levels >= 1");
  CapTesterResult result;
  result.pass = true;
  for (int j = 0; j <= cfg.grid_levels; ++j) {
    CapLevelRecord rec;
    rec.phi = cfg.theta * std::pow(2.0, -j);
    double width = std::sin(rec.phi);
    rec.band_fraction =
        band_fraction(x, v_hat, 0.0, [width](const Point& p) { return width * norm2(p); });
    rec.bound = cfg.c / 2.0 * rec.phi + cfg.eps_add;
    rec.ok = rec.band_fraction <= rec.bound;
    if (!rec.ok) result.pass = false;
    result.residual = rec.band_fraction;
    result.levels.push_back(rec);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Agnostic halfspace learner (stand-in)
//
// Best-of-pool on an internal 80/20 holdout: Chow direction, exact ERM in
// low dimension, pocket-perceptron restarts, and local angular
// perturbations of the running best. Contract: holdout error matches the
// pool optimum (we return exactly the pool minimizer on the holdout).

inline std::vector<double> agnostic_learn_stub(const LabeledDataset& s, double /*eps*/,
                                               double /*delta*/, Rng rng) {
  if (s.size() < 5) throw std::invalid_argument("agnostic_learn_stub: needs >= 5 examples");
  const std::size_t n_hold = std::max<std::size_t>(1, s.size() / 5);
  LabeledDataset train(s.dim);
  LabeledDataset hold(s.dim);
  for (std::size_t i = 0; i < s.size(); ++i) {
    (i < s.size() - n_hold ? train : hold).examples.push_back(s.examples[i]);
  }

  std::vector<std::vector<double>> pool;
  try {
    pool.push_back(chow_direction(train));
  } catch (const DegenerateChowError&) {
  }
  if (s.dim <= 3) {
    if (s.dim <= 2 || train.size() <= 400) {
      pool.push_back(erm_homogeneous(train, rng.substream(0)));
    } else {
      LabeledDataset sub(s.dim);
      sub.examples.assign(train.examples.begin(), train.examples.begin() + 400);
      pool.push_back(erm_homogeneous(sub, rng.substream(0)));
    }
  }
  Rng pocket_rng = rng.substream(1);
  for (int r = 0; r < 12; ++r) {
    pool.push_back(detail::pocket_perceptron(train, pocket_rng, 8));
  }
  if (pool.empty()) pool.push_back(detail::random_unit(s.dim, pocket_rng));

  auto best = pool.front();
  long best_err = detail::zero_one_errors(hold, best);
  for (const auto& cand : pool) {
    long err = detail::zero_one_errors(hold, cand);
    if (err < best_err) {
      best_err = err;
      best = cand;
    }
  }
  Rng perturb_rng = rng.substream(2);
  const double sigmas[] = {0.02, 0.05, 0.15, 0.4};
  for (int r = 0; r < 40; ++r) {
    std::vector<double> cand = best;
    double sigma = sigmas[r % 4];
    for (double& c : cand) c += sigma * perturb_rng.normal();
    double n = norm2(cand);
    if (n < 1e-12) continue;
    for (double& c : cand) c /= n;
    long err = detail::zero_one_errors(hold, cand);
    if (err < best_err) {
      best_err = err;
      best = cand;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// TDS learners for halfspaces

// Realizable, origin-centered halfspaces. ERM on the training sample, then
// reject when too much of the test sample sits inside the uncertainty band
// |v.x| <= eps' ||x|| (which contains every point where some direction
// within eps' of v disagrees with v).
inline TdsOutcome tds_homogeneous_realizable(const LabeledDataset& s_train,
                                             const Dataset& x_test, double eps, Rng rng) {
  if (s_train.empty() || x_test.empty()) {
    throw std::invalid_argument("tds_homogeneous_realizable: empty input");
  }
  if (s_train.dim != x_test.dim) {
    throw std::invalid_argument("tds_homogeneous_realizable: dimension mismatch");
  }
  if (!(eps > 0.0) || eps >= 1.0) {
    throw std::invalid_argument("tds_homogeneous_realizable: eps must be in (0,1)");
  }
  const double d = static_cast<double>(s_train.dim);
  const double eps_prime = std::pow(eps, 1.5) / (10.0 * std::sqrt(d));

  auto v_hat = erm_homogeneous(s_train, rng);
  Hypothesis h = halfspace_hypothesis(v_hat, 0.0);

  double band = band_fraction(x_test, v_hat, 0.0,
                              [eps_prime](const Point& p) { return eps_prime * norm2(p); });

  Diagnostics diag;
  diag.branch = "homogeneous-realizable";
  diag.set("eps", eps);
  diag.set("eps_prime", eps_prime);
  diag.set("band_fraction", band);
  diag.set("reject_threshold", 0.75 * eps);
  diag.set("train_error", empirical_error(h, s_train));

  if (band > 0.75 * eps) return TdsOutcome::reject(std::move(diag));
  return TdsOutcome::accept(std::move(h), std::move(diag));
}

// Agnostic, origin-centered halfspaces over isotropic log-concave training
// marginals. Learner and tester are documented stand-ins for the cited
// external subroutines with the same input/output contracts.
inline TdsOutcome tds_homogeneous_agnostic(const LabeledDataset& s_train, const Dataset& x_test,
                                           double eps, double delta, const Constants& constants,
                                           Rng rng) {
  if (s_train.size() < 100) {
    throw std::invalid_argument("tds_homogeneous_agnostic: needs >= 100 training examples");
  }
  if (s_train.dim != x_test.dim) {
    throw std::invalid_argument("tds_homogeneous_agnostic: dimension mismatch");
  }
  if (!(eps > 0.0) || eps >= 1.0 || !(delta > 0.0) || delta >= 1.0) {
    throw std::invalid_argument("tds_homogeneous_agnostic: eps, delta must be in (0,1)");
  }
  constants.validate();

  LabeledDataset s1(s_train.dim);
  LabeledDataset s2(s_train.dim);
  const std::size_t half = s_train.size() / 2;
  s1.examples.assign(s_train.examples.begin(), s_train.examples.begin() + half);
  s2.examples.assign(s_train.examples.begin() + half, s_train.examples.end());

  auto v_hat = agnostic_learn_stub(s1, eps, delta / 4.0, rng.substream(0));
  Hypothesis h = halfspace_hypothesis(v_hat, 0.0);
  double eps_hat = empirical_error(h, s2);

  // The tester needs theta in (0, pi/4]; the linear error-to-angle map is
  // clamped to its domain.
  double theta = std::min(constants.angle_per_error * eps_hat + eps, kPi / 4.0);
  CapTesterConfig cfg{theta, 6, constants.cap_tester_c, eps / 20.0};
  auto tester = cap_disagreement_tester(x_test, v_hat, cfg);

  Diagnostics diag;
  diag.branch = "homogeneous-agnostic";
  diag.note("agnostic-learner stand-in");
  diag.note("cap-tester stand-in");
  diag.set("eps", eps);
  diag.set("delta", delta);
  diag.set("eps_hat", eps_hat);
  diag.set("theta", theta);
  diag.set("cap_c", cfg.c);
  diag.set("cap_eps_add", cfg.eps_add);
  diag.set("cap_levels", static_cast<double>(cfg.grid_levels));
  diag.set("cap_residual", tester.residual);
  double worst_margin = -1.0;
  for (const auto& lvl : tester.levels) {
    worst_margin = std::max(worst_margin, lvl.band_fraction - lvl.bound);
  }
  diag.set("cap_worst_margin", worst_margin);

  if (!tester.pass) return TdsOutcome::reject(std::move(diag));
  return TdsOutcome::accept(std::move(h), std::move(diag));
}

// Realizable general halfspaces under a Gaussian training marginal. Very
// biased labels route to a constant hypothesis guarded by a low-degree
// moment test of the test sample against the Gaussian; otherwise the
// parameters are recovered from the Chow vector and the projected
// thresholds, guarded by an affine uncertainty band. Exponents use log10:
// with the desk-scale defaults this keeps moment tolerances inside what an
// empirical moment can certify.
inline TdsOutcome tds_general_halfspace(const LabeledDataset& s_train, const Dataset& x_test,
                                        double eps, const Constants& constants, Rng /*rng*/) {
  if (s_train.empty() || x_test.empty()) {
    throw std::invalid_argument("tds_general_halfspace: empty input");
  }
  if (s_train.dim != x_test.dim) {
    throw std::invalid_argument("tds_general_halfspace: dimension mismatch");
  }
  if (!(eps > 0.0) || eps >= 1.0) {
    throw std::invalid_argument("tds_general_halfspace: eps must be in (0,1)");
  }
  constants.validate();

  const double d = static_cast<double>(s_train.dim);
  const double log_inv_eps = std::log10(1.0 / eps);
  const double t_rounds = std::exp2(constants.c1 * constants.c1 * log_inv_eps + 1.0);
  const int k = static_cast<int>(std::ceil(constants.c1 * log_inv_eps));
  const double delta = eps / std::pow(d, constants.c2 * static_cast<double>(k));
  const double beta = eps * eps / (constants.c3 * std::pow(d, constants.c3));

  long minus = 0;
  for (const auto& e : s_train.examples) {
    if (e.y < 0) ++minus;
  }
  const double frac_minus = static_cast<double>(minus) / static_cast<double>(s_train.size());
  const int b = frac_minus <= 0.5 ? +1 : -1;  // majority label, ties toward +1
  const double bias_error = std::min(frac_minus, 1.0 - frac_minus);

  Diagnostics diag;
  diag.set("eps", eps);
  diag.set("t_rounds", t_rounds);
  diag.set("k", static_cast<double>(k));
  diag.set("delta", delta);
  diag.set("beta", beta);
  diag.set("bias_error", bias_error);

  if (bias_error <= 1.0 / t_rounds) {
    diag.branch = "large-bias";
    diag.set("constant_label", static_cast<double>(b));
    auto mm = moments::moment_match_test(x_test, moments::StandardGaussian{s_train.dim}, k, delta);
    diag.set("worst_moment_gap", mm.report.worst_gap);
    if (!mm.pass) return TdsOutcome::reject(std::move(diag));
    return TdsOutcome::accept(constant_hypothesis(b), std::move(diag));
  }

  diag.branch = "low-bias";
  std::vector<double> v_hat;
  try {
    v_hat = chow_direction(s_train);
  } catch (const DegenerateChowError&) {
    diag.note("degenerate-chow");
    return TdsOutcome::reject(std::move(diag));
  }
  double tau_hat = recover_offset(s_train, v_hat);
  double band = band_fraction(x_test, v_hat, tau_hat,
                              [beta](const Point& p) { return beta * (norm2(p) + 1.0); });
  diag.set("tau_hat", tau_hat);
  diag.set("band_fraction", band);
  diag.set("reject_threshold", 10.0 * eps);

  if (band > 10.0 * eps) return TdsOutcome::reject(std::move(diag));
  return TdsOutcome::accept(halfspace_hypothesis(v_hat, tau_hat), std::move(diag));
}

}  // namespace tds::halfspaces
