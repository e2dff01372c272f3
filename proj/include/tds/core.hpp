#pragma once

// Core domain types shared by every learner in this library: points and
// labeled datasets, multi-indices and sparse polynomials, the hypothesis
// union, accept/reject outcomes with diagnostics, tunable constants, and a
// counter-based seeded RNG whose substreams are independent of trial
// execution order.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace tds {

using Point = std::vector<double>;
using MultiIndex = std::vector<int>;

// Fixed convention used everywhere: sign(0) := +1. Keeps ERM ties and
// offset search reproducible.
inline int sign_pm(double t) { return t >= 0.0 ? +1 : -1; }

struct DegenerateChowError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct StrictnessInfeasibleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void validate_point(const Point& x) {
  if (x.empty()) throw std::invalid_argument("point: dimension must be >= 1");
  for (double c : x) {
    if (!std::isfinite(c)) throw std::invalid_argument("point: non-finite coordinate");
  }
}

struct LabeledExample {
  Point x;
  int y = +1;  // in {-1, +1}
};

// Unlabeled sample. Empirical expectations over a dataset are uniform
// averages counting duplicates separately.
struct Dataset {
  int dim = 0;
  std::vector<Point> points;

  Dataset() = default;
  explicit Dataset(int d) : dim(d) {}

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }

  void add(Point x) {
    validate_point(x);
    if (static_cast<int>(x.size()) != dim) {
      throw std::invalid_argument("dataset: point dimension mismatch");
    }
    points.push_back(std::move(x));
  }
};

struct LabeledDataset {
  int dim = 0;
  std::vector<LabeledExample> examples;

  LabeledDataset() = default;
  explicit LabeledDataset(int d) : dim(d) {}

  std::size_t size() const { return examples.size(); }
  bool empty() const { return examples.empty(); }

  void add(Point x, int y) {
    validate_point(x);
    if (static_cast<int>(x.size()) != dim) {
      throw std::invalid_argument("labeled dataset: point dimension mismatch");
    }
    if (y != +1 && y != -1) throw std::invalid_argument("label must be +1 or -1");
    examples.push_back(LabeledExample{std::move(x), y});
  }

  Dataset unlabeled() const {
    Dataset out(dim);
    out.points.reserve(examples.size());
    for (const auto& e : examples) out.points.push_back(e.x);
    return out;
  }
};

inline int total_degree(const MultiIndex& alpha) {
  return std::accumulate(alpha.begin(), alpha.end(), 0);
}

inline double monomial_value(const Point& x, const MultiIndex& alpha) {
  double v = 1.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    for (int e = 0; e < alpha[i]; ++e) v *= x[i];
  }
  return v;
}

// Degree- and coefficient-bounded polynomial in the monomial basis.
// Absent multi-indices mean a zero coefficient. On hypercube domains only
// the parity of each exponent matters for evaluation.
struct SparsePolynomial {
  int dim = 0;
  int degree_bound = 0;    // k
  double coef_bound = 0.0; // B
  std::map<MultiIndex, double> terms;

  SparsePolynomial() = default;
  SparsePolynomial(int d, int k, double b) : dim(d), degree_bound(k), coef_bound(b) {
    if (d < 1 || k < 0 || !(b > 0.0)) {
      throw std::invalid_argument("polynomial: need dim >= 1, degree >= 0, bound > 0");
    }
  }

  void set_coefficient(MultiIndex alpha, double c) {
    if (static_cast<int>(alpha.size()) != dim) {
      throw std::invalid_argument("polynomial: multi-index dimension mismatch");
    }
    for (int e : alpha) {
      if (e < 0) throw std::invalid_argument("polynomial: negative exponent");
    }
    if (total_degree(alpha) > degree_bound) {
      throw std::invalid_argument("polynomial: term exceeds degree bound");
    }
    if (std::abs(c) > coef_bound + 1e-12) {
      throw std::invalid_argument("polynomial: coefficient exceeds bound");
    }
    if (c == 0.0) {
      terms.erase(alpha);
    } else {
      terms[std::move(alpha)] = c;
    }
  }

  double coefficient(const MultiIndex& alpha) const {
    auto it = terms.find(alpha);
    return it == terms.end() ? 0.0 : it->second;
  }

  double evaluate(const Point& x) const {
    if (static_cast<int>(x.size()) != dim) {
      throw std::invalid_argument("polynomial: point dimension mismatch");
    }
    double acc = 0.0;
    for (const auto& [alpha, c] : terms) acc += c * monomial_value(x, alpha);
    return acc;
  }
};

// ---------------------------------------------------------------------------
// Hypotheses

struct Halfspace {
  std::vector<double> v;  // unit normal
  double tau = 0.0;
};

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

// Renormalizes on construction; tolerance for callers asserting unitness is
// 1e-9 to avoid drift in angle computations.
inline Halfspace make_halfspace(std::vector<double> v, double tau) {
  validate_point(v);
  double n = norm2(v);
  if (n < 1e-12) throw std::invalid_argument("halfspace: zero normal vector");
  for (double& c : v) c /= n;
  return Halfspace{std::move(v), tau};
}

struct Hypothesis;

struct ConstantHypothesis {
  int label = +1;
};

struct PolySignHypothesis {
  SparsePolynomial poly;
};

struct MajorityHypothesis {
  std::vector<Hypothesis> members;  // odd length
};

struct Hypothesis {
  std::variant<ConstantHypothesis, Halfspace, PolySignHypothesis, MajorityHypothesis> node;

  Hypothesis() : node(ConstantHypothesis{+1}) {}
  Hypothesis(ConstantHypothesis c) : node(std::move(c)) {}
  Hypothesis(Halfspace h) : node(std::move(h)) {}
  Hypothesis(PolySignHypothesis p) : node(std::move(p)) {}
  Hypothesis(MajorityHypothesis m) : node(std::move(m)) {}
};

inline Hypothesis constant_hypothesis(int label) {
  if (label != +1 && label != -1) throw std::invalid_argument("constant label must be +-1");
  return Hypothesis{ConstantHypothesis{label}};
}

inline Hypothesis halfspace_hypothesis(std::vector<double> v, double tau) {
  return Hypothesis{make_halfspace(std::move(v), tau)};
}

inline Hypothesis poly_sign_hypothesis(SparsePolynomial p) {
  return Hypothesis{PolySignHypothesis{std::move(p)}};
}

inline Hypothesis majority_hypothesis(std::vector<Hypothesis> members) {
  if (members.empty() || members.size() % 2 == 0) {
    throw std::invalid_argument("majority: member count must be odd");
  }
  return Hypothesis{MajorityHypothesis{std::move(members)}};
}

// Total on finite inputs of the right dimension.
inline int eval_hypothesis(const Hypothesis& h, const Point& x) {
  return std::visit(
      [&x](const auto& node) -> int {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, ConstantHypothesis>) {
          return node.label;
        } else if constexpr (std::is_same_v<T, Halfspace>) {
          if (node.v.size() != x.size()) {
            throw std::invalid_argument("halfspace: point dimension mismatch");
          }
          return sign_pm(dot(node.v, x) - node.tau);
        } else if constexpr (std::is_same_v<T, PolySignHypothesis>) {
          return sign_pm(node.poly.evaluate(x));
        } else {
          int s = 0;
          for (const Hypothesis& m : node.members) s += eval_hypothesis(m, x);
          return sign_pm(static_cast<double>(s));
        }
      },
      h.node);
}

// Structural complement. Exact for constants, trees of constants and odd
// majorities; for halfspaces and polynomial signs it differs from the true
// complement only on the measure-zero set where the argument of sign() is
// exactly zero.
inline Hypothesis negate(const Hypothesis& h) {
  return std::visit(
      [](const auto& node) -> Hypothesis {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, ConstantHypothesis>) {
          return constant_hypothesis(-node.label);
        } else if constexpr (std::is_same_v<T, Halfspace>) {
          std::vector<double> w = node.v;
          for (double& c : w) c = -c;
          return Hypothesis{Halfspace{std::move(w), -node.tau}};
        } else if constexpr (std::is_same_v<T, PolySignHypothesis>) {
          SparsePolynomial q = node.poly;
          for (auto& [alpha, c] : q.terms) c = -c;
          return Hypothesis{PolySignHypothesis{std::move(q)}};
        } else {
          std::vector<Hypothesis> ms;
          ms.reserve(node.members.size());
          for (const Hypothesis& m : node.members) ms.push_back(negate(m));
          return Hypothesis{MajorityHypothesis{std::move(ms)}};
        }
      },
      h.node);
}

inline double empirical_error(const Hypothesis& h, const LabeledDataset& s) {
  if (s.empty()) throw std::invalid_argument("empirical_error: empty dataset");
  std::size_t wrong = 0;
  for (const auto& e : s.examples) {
    if (eval_hypothesis(h, e.x) != e.y) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(s.size());
}

// Error of the pointwise complement of h; complements empirical_error
// exactly, including sign(0) ties.
inline double empirical_error_negated(const Hypothesis& h, const LabeledDataset& s) {
  if (s.empty()) throw std::invalid_argument("empirical_error: empty dataset");
  std::size_t wrong = 0;
  for (const auto& e : s.examples) {
    if (-eval_hypothesis(h, e.x) != e.y) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(s.size());
}

// ---------------------------------------------------------------------------
// Outcomes

enum class Verdict { kReject, kAccept };

struct Diagnostics {
  std::string branch;
  std::map<std::string, double> values;
  std::vector<std::string> notes;

  void set(const std::string& key, double v) { values[key] = v; }
  double at(const std::string& key) const {
    auto it = values.find(key);
    if (it == values.end()) throw std::out_of_range("diagnostics: missing key " + key);
    return it->second;
  }
  bool has(const std::string& key) const { return values.count(key) > 0; }
  void note(std::string s) { notes.push_back(std::move(s)); }

  friend bool operator==(const Diagnostics&, const Diagnostics&) = default;
};

struct TdsOutcome {
  Verdict verdict = Verdict::kReject;
  std::optional<Hypothesis> hypothesis;  // present iff accepted
  Diagnostics diagnostics;

  bool accepted() const { return verdict == Verdict::kAccept; }

  static TdsOutcome accept(Hypothesis h, Diagnostics d) {
    TdsOutcome out;
    out.verdict = Verdict::kAccept;
    out.hypothesis = std::move(h);
    out.diagnostics = std::move(d);
    return out;
  }
  static TdsOutcome reject(Diagnostics d) {
    TdsOutcome out;
    out.verdict = Verdict::kReject;
    out.diagnostics = std::move(d);
    return out;
  }
};

// ---------------------------------------------------------------------------
// Tunable constants
//
// Desk-scale defaults; none of them are canonical. `tds calibrate` retunes
// them per scenario family so completeness targets hold empirically.

struct Constants {
  double c1 = 2.0;  // bias threshold / moment degree scale (general halfspaces)
  double c2 = 1.0;  // moment tolerance exponent scale
  double c3 = 2.0;  // disagreement band width scale
  double cap_tester_c = 4.0;    // cap tester slope
  double angle_per_error = 4.0; // maps a train-error estimate to a tester angle
  int amplification_t = 20;     // repetitions for success amplification; even

  void validate() const {
    if (!(c1 > 0) || !(c2 > 0) || !(c3 > 0) || !(cap_tester_c > 0) || !(angle_per_error > 0)) {
      throw std::invalid_argument("constants: all scales must be positive");
    }
    if (amplification_t < 2 || amplification_t % 2 != 0) {
      throw std::invalid_argument("constants: amplification_t must be a positive even integer");
    }
  }
};

// ---------------------------------------------------------------------------
// Seeded randomness
//
// Counter-based generator (splitmix64 stream). Substreams are derived by
// key mixing, so per-trial streams are identical no matter which order the
// trials execute in. Copying an Rng forks its state.

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : key_(mix(seed ^ 0x6a09e667f3bcc909ULL)), counter_(0) {}

  Rng substream(std::uint64_t index) const {
    return Rng(FromKey{}, mix(key_ ^ mix(index + 0x9e3779b97f4a7c15ULL)));
  }

  std::uint64_t next_u64() {
    counter_ += 0x9e3779b97f4a7c15ULL;
    return mix(key_ + counter_);
  }

  // Uniform in [0, 1).
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  int pm1() { return (next_u64() & 1ULL) ? +1 : -1; }

  // Bounded integer without modulo bias worth caring about at desk scale.
  std::uint64_t uniform_below(std::uint64_t n) {
    return n == 0 ? 0 : next_u64() % n;
  }

  // Standard normal via Box-Muller; two uniforms per draw, no cached state.
  double normal() {
    double u1 = uniform01();
    double u2 = uniform01();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  double exponential() {
    double u = uniform01();
    if (u >= 1.0) u = 1.0 - 0x1.0p-53;
    return -std::log(1.0 - u);
  }

  // Laplace standardized to unit variance (scale 1/sqrt(2)).
  double laplace_unit_variance() {
    double mag = exponential() * 0.7071067811865475244;
    return (next_u64() & 1ULL) ? mag : -mag;
  }

  // Student-t with integer dof: normal over sqrt(chi^2_nu / nu).
  double student_t(int nu) {
    if (nu < 1) throw std::invalid_argument("student_t: dof must be >= 1");
    double z = normal();
    double chi2 = 0.0;
    for (int i = 0; i < nu; ++i) {
      double g = normal();
      chi2 += g * g;
    }
    return z / std::sqrt(chi2 / static_cast<double>(nu));
  }

 private:
  struct FromKey {};
  Rng(FromKey, std::uint64_t key) : key_(key), counter_(0) {}

  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t key_;
  std::uint64_t counter_;
};

}  // namespace tds
