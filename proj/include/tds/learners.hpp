#pragma once

// Distribution-generic accept/reject learners: the moment-matching learner,
// the disagreement-region meta-learner, success-probability amplification,
// and the adapter from confidence-region (PQ-style) learners.

#include <cmath>
#include <functional>
#include <utility>
#include <variant>
#include <vector>

#include "tds/core.hpp"
#include "tds/halfspaces.hpp"
#include "tds/moments.hpp"
#include "tds/regression.hpp"

namespace tds::learners {

using TdsLearner = std::function<TdsOutcome(const LabeledDataset&, const Dataset&, Rng)>;

// "paper" uses the derived moment tolerance eps'/(B^2 d^(4k)); "practical"
// lets the caller pass any tolerance. Experiments must state which mode ran.
struct PaperStrictness {};
struct PracticalStrictness {
  double delta = 0.0;
};
using StrictnessMode = std::variant<PaperStrictness, PracticalStrictness>;

// Moment-matching learner: reject unless every test moment up to degree 2k
// matches the reference within the tolerance; otherwise fit a degree-k,
// B-bounded polynomial to the training sample and output its sign.
inline TdsOutcome tds_moment_matching(const LabeledDataset& s_train, const Dataset& x_test,
                                      const moments::ReferenceMarginal& reference, int k,
                                      double b, double eps, double delta_fail,
                                      const StrictnessMode& mode, Rng rng) {
  if (s_train.empty() || x_test.empty()) {
    throw std::invalid_argument("tds_moment_matching: empty input");
  }
  if (s_train.dim != x_test.dim || s_train.dim != moments::reference_dim(reference)) {
    throw std::invalid_argument("tds_moment_matching: dimension mismatch");
  }
  if (k < 0 || !(b > 0.0) || !(eps > 0.0)) {
    throw std::invalid_argument("tds_moment_matching: need k >= 0, B > 0, eps > 0");
  }

  const double eps_prime = eps / 100.0;
  double delta = 0.0;
  bool paper_mode = false;
  if (std::holds_alternative<PaperStrictness>(mode)) {
    paper_mode = true;
    delta = moments::default_delta(eps_prime, b, s_train.dim, k);
  } else {
    delta = std::get<PracticalStrictness>(mode).delta;
    if (!(delta > 0.0)) {
      throw std::invalid_argument("tds_moment_matching: practical delta must be > 0");
    }
  }

  Diagnostics diag;
  diag.branch = "moment-matching";
  diag.set("eps", eps);
  diag.set("delta_fail", delta_fail);
  diag.set("k", static_cast<double>(k));
  diag.set("coef_bound", b);
  diag.set("moment_delta", delta);
  diag.set("paper_mode", paper_mode ? 1.0 : 0.0);

  auto mm = moments::moment_match_test(x_test, reference, 2 * k, delta);
  diag.set("worst_moment_gap", mm.report.worst_gap);
  if (!mm.pass) return TdsOutcome::reject(std::move(diag));

  regression::RegressionProblem prob;
  prob.train = s_train;
  prob.degree = k;
  prob.coef_bound = b;
  prob.target_accuracy = eps_prime;
  auto p_hat = regression::fit_bounded_polynomial(prob, rng);
  diag.set("train_squared_loss", regression::squared_loss(p_hat, s_train));
  return TdsOutcome::accept(poly_sign_hypothesis(std::move(p_hat)), std::move(diag));
}

// ERM oracle contract: the returned hypothesis's empirical error is within
// the requested accuracy of the class optimum. Enforced for the built-in
// instantiations; documented for user-supplied ones.
struct ErmOracle {
  std::function<Hypothesis(const LabeledDataset&, double)> fit;
};

// Decides membership of a point in the eps'-disagreement region of a
// hypothesis: the set where some classifier eps'-close to it in-class
// disagrees with it.
struct MembershipOracle {
  std::function<bool(const Hypothesis&, double, const Point&)> contains;
};

// Disagreement-region learner: ERM on the training sample, reject when more
// than eps/2 of the test sample falls inside the fitted hypothesis's
// disagreement region. eps' is the caller's responsibility and must satisfy
// eps' * theta(eps', d) <= eps/2 for the instantiated class.
inline TdsOutcome tds_disagreement(const LabeledDataset& s_train, const Dataset& x_test,
                                   double eps, double eps_prime, const ErmOracle& erm,
                                   const MembershipOracle& member, Rng /*rng*/) {
  if (s_train.empty() || x_test.empty()) {
    throw std::invalid_argument("tds_disagreement: empty input");
  }
  if (!(eps > 0.0)) throw std::invalid_argument("tds_disagreement: eps must be > 0");
  if (eps_prime < 0.0) throw std::invalid_argument("tds_disagreement: eps' must be >= 0");

  Hypothesis h = erm.fit(s_train, eps_prime);
  long inside = 0;
  for (const Point& p : x_test.points) {
    if (member.contains(h, eps_prime, p)) ++inside;
  }
  double region_fraction = static_cast<double>(inside) / static_cast<double>(x_test.size());

  Diagnostics diag;
  diag.branch = "disagreement";
  diag.set("eps", eps);
  diag.set("eps_prime", eps_prime);
  diag.set("region_fraction", region_fraction);
  diag.set("reject_threshold", eps / 2.0);
  diag.set("train_error", empirical_error(h, s_train));

  if (region_fraction > eps / 2.0) return TdsOutcome::reject(std::move(diag));
  return TdsOutcome::accept(std::move(h), std::move(diag));
}

// Homogeneous halfspaces under the Gaussian: the eps'-disagreement region
// is exactly the angular band |v.x| <= sin(pi eps')||x|| (disagreement mass
// equals angle/pi), so its mass is 2 eps' and eps' = eps/8 leaves headroom
// below the eps/2 reject threshold.
inline double homogeneous_disagreement_eps_prime(double eps) { return eps / 8.0; }

inline ErmOracle homogeneous_erm_oracle(Rng rng) {
  return ErmOracle{[rng](const LabeledDataset& s, double) -> Hypothesis {
    return halfspace_hypothesis(halfspaces::erm_homogeneous(s, rng), 0.0);
  }};
}

inline MembershipOracle gaussian_homogeneous_membership() {
  return MembershipOracle{[](const Hypothesis& h, double eps_prime, const Point& x) -> bool {
    const auto* hs = std::get_if<Halfspace>(&h.node);
    if (hs == nullptr) {
      throw std::invalid_argument("gaussian membership oracle: hypothesis must be a halfspace");
    }
    if (eps_prime <= 0.0) return false;
    double width = std::sin(std::min(halfspaces::kPi * eps_prime, halfspaces::kPi / 2.0));
    return std::abs(dot(hs->v, x)) <= width * norm2(x);
  }};
}

// Success amplification by repetition over disjoint shards: run the base
// learner on T contiguous train/test shards, reject when more than T/2
// runs reject, otherwise output the majority vote of the earliest
// accepting hypotheses (largest odd count <= T/2, so the majority is
// well-defined).
inline TdsLearner amplify(TdsLearner base, int t_rounds) {
  if (t_rounds < 2 || t_rounds % 2 != 0) {
    throw std::invalid_argument("amplify: T must be a positive even integer");
  }
  return [base = std::move(base), t_rounds](const LabeledDataset& s_train, const Dataset& x_test,
                                            Rng rng) -> TdsOutcome {
    const auto t = static_cast<std::size_t>(t_rounds);
    if (s_train.size() < t || x_test.size() < t) {
      throw std::invalid_argument("amplify: need at least T examples per input");
    }
    std::vector<Hypothesis> accepted;
    int rejects = 0;
    for (std::size_t shard = 0; shard < t; ++shard) {
      LabeledDataset s_shard(s_train.dim);
      Dataset x_shard(x_test.dim);
      std::size_t tr_lo = shard * s_train.size() / t;
      std::size_t tr_hi = (shard + 1) * s_train.size() / t;
      std::size_t te_lo = shard * x_test.size() / t;
      std::size_t te_hi = (shard + 1) * x_test.size() / t;
      s_shard.examples.assign(s_train.examples.begin() + tr_lo,
                              s_train.examples.begin() + tr_hi);
      x_shard.points.assign(x_test.points.begin() + te_lo, x_test.points.begin() + te_hi);
      TdsOutcome outcome = base(s_shard, x_shard, rng.substream(shard));
      if (outcome.accepted()) {
        accepted.push_back(std::move(*outcome.hypothesis));
      } else {
        ++rejects;
      }
    }

    Diagnostics diag;
    diag.branch = "amplified";
    diag.set("t_rounds", static_cast<double>(t_rounds));
    diag.set("rejects", static_cast<double>(rejects));
    diag.set("accepts", static_cast<double>(t_rounds - rejects));

    if (rejects > t_rounds / 2) return TdsOutcome::reject(std::move(diag));
    std::size_t keep = static_cast<std::size_t>(t_rounds / 2);
    if (keep % 2 == 0) --keep;
    if (accepted.size() < keep) {
      // Unreachable when rejects <= T/2; kept as a defined behavior.
      return TdsOutcome::reject(std::move(diag));
    }
    accepted.resize(keep);
    diag.set("majority_size", static_cast<double>(keep));
    return TdsOutcome::accept(majority_hypothesis(std::move(accepted)), std::move(diag));
  };
}

// Confidence-region learner: returns a hypothesis plus the region of the
// feature space where its predictions are trusted.
struct PqLearner {
  std::function<std::pair<Hypothesis, std::function<bool(const Point&)>>(const LabeledDataset&,
                                                                         const Dataset&)>
      run;
};

// Adapter from a confidence-region learner: feed it the first half of the
// test sample, then audit the held-out half and reject when more than
// eps/3 of it falls outside the returned region.
inline TdsOutcome pq_to_tds(const PqLearner& pq, const LabeledDataset& s_train,
                            const Dataset& x_test, double eps, Rng /*rng*/) {
  if (s_train.empty() || x_test.size() < 2) {
    throw std::invalid_argument("pq_to_tds: need a splittable test sample");
  }
  if (!(eps > 0.0)) throw std::invalid_argument("pq_to_tds: eps must be > 0");

  Dataset x1(x_test.dim);
  Dataset x2(x_test.dim);
  const std::size_t half = x_test.size() / 2;
  x1.points.assign(x_test.points.begin(), x_test.points.begin() + half);
  x2.points.assign(x_test.points.begin() + half, x_test.points.end());

  auto [h, region] = pq.run(s_train, x1);
  long outside = 0;
  for (const Point& p : x2.points) {
    if (!region(p)) ++outside;
  }
  double outside_fraction = static_cast<double>(outside) / static_cast<double>(x2.size());

  Diagnostics diag;
  diag.branch = "pq-adapter";
  diag.set("eps", eps);
  diag.set("outside_fraction", outside_fraction);
  diag.set("reject_threshold", eps / 3.0);

  if (outside_fraction > eps / 3.0) return TdsOutcome::reject(std::move(diag));
  return TdsOutcome::accept(std::move(h), std::move(diag));
}

}  // namespace tds::learners
