#pragma once

// Coefficient-bounded degree-k least-squares regression in the monomial
// basis, plus the moment-transfer gap checker. The monomial basis (rather
// than an orthonormal one) keeps the coefficient box meaningful to the
// moment tests.

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "tds/core.hpp"
#include "tds/moments.hpp"

namespace tds::regression {

struct RegressionProblem {
  LabeledDataset train;
  int degree = 0;               // k
  double coef_bound = 0.0;      // B
  double target_accuracy = 0.0; // eps': acceptable suboptimality of the fit
  double ridge = 0.0;           // lambda_reg >= 0

  void validate() const {
    if (train.empty()) throw std::invalid_argument("regression: empty training set");
    if (degree < 0) throw std::invalid_argument("regression: degree must be >= 0");
    if (!(coef_bound > 0.0)) throw std::invalid_argument("regression: coefficient bound must be > 0");
    if (!(target_accuracy > 0.0)) throw std::invalid_argument("regression: target accuracy must be > 0");
    if (ridge < 0.0) throw std::invalid_argument("regression: ridge must be >= 0");
  }
};

inline double squared_loss(const SparsePolynomial& p, const LabeledDataset& s) {
  if (s.empty()) throw std::invalid_argument("squared_loss: empty dataset");
  double acc = 0.0;
  for (const auto& e : s.examples) {
    double r = static_cast<double>(e.y) - p.evaluate(e.x);
    acc += r * r;
  }
  return acc / static_cast<double>(s.size());
}

namespace detail {

struct DesignMatrix {
  std::vector<MultiIndex> basis;
  Eigen::MatrixXd phi;  // n x m monomial values
  Eigen::VectorXd y;
};

inline DesignMatrix build_design(const LabeledDataset& s, int degree) {
  DesignMatrix d;
  d.basis = moments::enumerate_multi_indices(s.dim, degree);
  const auto n = static_cast<Eigen::Index>(s.size());
  const auto m = static_cast<Eigen::Index>(d.basis.size());
  d.phi.resize(n, m);
  d.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& e = s.examples[static_cast<std::size_t>(i)];
    d.y(i) = static_cast<double>(e.y);
    for (Eigen::Index j = 0; j < m; ++j) {
      d.phi(i, j) = monomial_value(e.x, d.basis[static_cast<std::size_t>(j)]);
    }
  }
  return d;
}

inline double mean_squared_loss(const Eigen::MatrixXd& phi, const Eigen::VectorXd& y,
                                const Eigen::VectorXd& c) {
  return (phi * c - y).squaredNorm() / static_cast<double>(phi.rows());
}

// Solves (Phi'Phi/n + ridge I) c = Phi'y/n, reporting failure instead of
// returning a numerically meaningless vector.
inline bool solve_normal_equations(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                   Eigen::VectorXd& c) {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
  if (ldlt.info() != Eigen::Success) return false;
  c = ldlt.solve(b);
  if (!c.allFinite()) return false;
  double residual = (a * c - b).lpNorm<Eigen::Infinity>();
  return residual <= 1e-6 * (1.0 + b.lpNorm<Eigen::Infinity>());
}

// Box-projected gradient descent on the mean squared loss with step 1/L.
// Returns the loss after each pass (non-increasing: exact gradient step on
// a convex quadratic followed by projection onto the box).
inline std::vector<double> projected_gradient_refine(const Eigen::MatrixXd& gram,
                                                     const Eigen::VectorXd& rhs,
                                                     const Eigen::MatrixXd& phi,
                                                     const Eigen::VectorXd& y, Eigen::VectorXd& c,
                                                     double bound, double stop_improvement,
                                                     int max_passes) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigs(gram);
  double lipschitz = 2.0 * std::max(eigs.eigenvalues().maxCoeff(), 1e-12);
  double step = 1.0 / lipschitz;
  std::vector<double> trace;
  double loss = mean_squared_loss(phi, y, c);
  trace.push_back(loss);
  for (int pass = 0; pass < max_passes; ++pass) {
    Eigen::VectorXd grad = 2.0 * (gram * c - rhs);
    c -= step * grad;
    for (Eigen::Index j = 0; j < c.size(); ++j) c(j) = std::clamp(c(j), -bound, bound);
    double next = mean_squared_loss(phi, y, c);
    double improvement = loss - next;
    loss = next;
    trace.push_back(loss);
    if (improvement < stop_improvement) break;
  }
  return trace;
}

}  // namespace detail

// Ridge-regularized normal equations, then, when the box constraint binds,
// projected gradient descent (clip to [-B, B] after each step) until the
// per-pass loss improvement drops below eps'/4 or 1e4 passes elapse. A
// singular system at ridge 0 is retried once with ridge 1e-8.
//
// The rng parameter keeps the operation signature uniform with the other
// learner-facing fits; the solver itself is deterministic.
inline SparsePolynomial fit_bounded_polynomial(const RegressionProblem& prob, Rng /*rng*/) {
  prob.validate();
  const double b = prob.coef_bound;
  auto design = detail::build_design(prob.train, prob.degree);
  const auto n = design.phi.rows();
  const auto m = design.phi.cols();

  Eigen::MatrixXd gram = (design.phi.transpose() * design.phi) / static_cast<double>(n);
  Eigen::VectorXd rhs = (design.phi.transpose() * design.y) / static_cast<double>(n);

  double ridge = prob.ridge;
  Eigen::MatrixXd a = gram + ridge * Eigen::MatrixXd::Identity(m, m);
  Eigen::VectorXd c(m);
  if (!detail::solve_normal_equations(a, rhs, c)) {
    if (prob.ridge == 0.0) {
      ridge = 1e-8;
      a = gram + ridge * Eigen::MatrixXd::Identity(m, m);
      if (!detail::solve_normal_equations(a, rhs, c)) {
        throw std::runtime_error("fit_bounded_polynomial: normal equations unsolvable");
      }
    } else {
      throw std::runtime_error("fit_bounded_polynomial: normal equations unsolvable");
    }
  }

  bool clipped = false;
  for (Eigen::Index j = 0; j < m; ++j) {
    if (c(j) > b) {
      c(j) = b;
      clipped = true;
    } else if (c(j) < -b) {
      c(j) = -b;
      clipped = true;
    }
  }

  if (clipped || ridge > 0.0) {
    // Start from the better of the clipped solve and the zero polynomial so
    // the monotone refinement can never end up worse than predicting zero.
    Eigen::VectorXd zero = Eigen::VectorXd::Zero(m);
    if (detail::mean_squared_loss(design.phi, design.y, zero) <
        detail::mean_squared_loss(design.phi, design.y, c)) {
      c = zero;
    }
    detail::projected_gradient_refine(gram, rhs, design.phi, design.y, c, b,
                                      prob.target_accuracy / 4.0, 10000);
  }

  SparsePolynomial out(prob.train.dim, prob.degree, b);
  for (Eigen::Index j = 0; j < m; ++j) {
    double coef = std::clamp(c(j), -b, b);
    if (coef != 0.0) out.set_coefficient(design.basis[static_cast<std::size_t>(j)], coef);
  }
  return out;
}

namespace detail {

inline std::map<MultiIndex, double> subtract_terms(const SparsePolynomial& p1,
                                                   const SparsePolynomial& p2) {
  std::map<MultiIndex, double> diff = p1.terms;
  for (const auto& [alpha, coef] : p2.terms) {
    double& slot = diff[alpha];
    slot -= coef;
    if (slot == 0.0) diff.erase(alpha);
  }
  return diff;
}

inline std::map<MultiIndex, double> square_terms(const std::map<MultiIndex, double>& q,
                                                 int dim) {
  double pairs = static_cast<double>(q.size()) * static_cast<double>(q.size());
  if (pairs > 1e7) {
    throw std::invalid_argument("transfer_gap: monomial expansion exceeds 1e7 terms");
  }
  std::map<MultiIndex, double> sq;
  for (const auto& [a1, c1] : q) {
    for (const auto& [a2, c2] : q) {
      MultiIndex sum(static_cast<std::size_t>(dim), 0);
      for (int i = 0; i < dim; ++i) sum[static_cast<std::size_t>(i)] = a1[i] + a2[i];
      sq[std::move(sum)] += c1 * c2;
    }
  }
  return sq;
}

}  // namespace detail

struct TransferGap {
  double empirical = 0.0;  // mean over X of (p1-p2)^2
  double reference = 0.0;  // E_D[(p1-p2)^2]
  double gap = 0.0;        // |empirical - reference|
  double bound = 0.0;      // B^2 d^(4k) * worst moment gap at degree 2k
};

// Checks the square-loss transfer inequality: when the test sample's
// moments match the reference up to degree 2k within Delta, squared
// distances between degree-k, B-bounded polynomials transfer within
// B^2 d^(4k) Delta.
inline TransferGap transfer_gap(const SparsePolynomial& p1, const SparsePolynomial& p2,
                                const Dataset& x, const moments::ReferenceMarginal& d) {
  if (p1.dim != p2.dim) throw std::invalid_argument("transfer_gap: polynomial dims differ");
  if (x.empty()) throw std::invalid_argument("transfer_gap: empty dataset");
  if (x.dim != p1.dim) throw std::invalid_argument("transfer_gap: dataset dimension mismatch");

  const int k = std::max(p1.degree_bound, p2.degree_bound);
  const double b = std::max(p1.coef_bound, p2.coef_bound);

  auto diff = detail::subtract_terms(p1, p2);

  TransferGap out;
  for (const Point& pt : x.points) {
    double v = 0.0;
    for (const auto& [alpha, coef] : diff) v += coef * monomial_value(pt, alpha);
    out.empirical += v * v;
  }
  out.empirical /= static_cast<double>(x.size());

  auto sq = detail::square_terms(diff, p1.dim);
  for (const auto& [alpha, coef] : sq) {
    out.reference += coef * moments::reference_moment(d, alpha);
  }

  out.gap = std::abs(out.empirical - out.reference);
  auto mm = moments::moment_match_test(x, d, 2 * k, std::numeric_limits<double>::infinity());
  double worst = mm.report.worst_gap;
  out.bound = b * b * std::pow(static_cast<double>(p1.dim), 4.0 * static_cast<double>(k)) * worst;
  return out;
}

}  // namespace tds::regression
