#pragma once

// Seeded synthetic worlds: marginal samplers, ground-truth concepts, label
// models, and the grid-based lambda oracle used by the harness to measure
// the unavoidable error floor.

#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <utility>
#include <variant>
#include <vector>

#include "tds/core.hpp"

namespace tds::scenarios {

// ---------------------------------------------------------------------------
// Marginals

struct MarginalSpec;
using MarginalPtr = std::shared_ptr<const MarginalSpec>;

struct GaussianMarginal {
  int dim = 0;
};

struct CubeMarginal {
  int dim = 0;
};

// Product of Laplace coordinates standardized to unit variance: the stock
// isotropic log-concave exemplar beyond the Gaussian.
struct LaplaceProductMarginal {
  int dim = 0;
};

// Heavy-tailed adversary: raw (unstandardized) Student-t coordinates.
// Finite low-order moments for nu > 2 but per-coordinate variance nu/(nu-2),
// and the fourth moment diverges at nu = 3.
struct StudentTProductMarginal {
  int dim = 0;
  int nu = 3;
};

struct PointMassMarginal {
  Point x;
};

struct MeanShiftMarginal {
  MarginalPtr base;
  std::vector<double> mu;
};

struct CovScaleMarginal {
  MarginalPtr base;
  std::vector<double> scale;  // per-coordinate multiplier
};

// Rejection-samples the base until |v.x| <= width ||x||; every emitted
// point satisfies the band condition exactly.
struct BandConditionedMarginal {
  MarginalPtr base;
  std::vector<double> v;  // unit
  double width = 0.0;
};

struct MixtureMarginal {
  std::vector<std::pair<double, MarginalPtr>> components;  // weights sum to 1
};

struct MarginalSpec {
  std::variant<GaussianMarginal, CubeMarginal, LaplaceProductMarginal, StudentTProductMarginal,
               PointMassMarginal, MeanShiftMarginal, CovScaleMarginal, BandConditionedMarginal,
               MixtureMarginal>
      node;
};

inline MarginalPtr boxed(MarginalSpec spec) {
  return std::make_shared<const MarginalSpec>(std::move(spec));
}

inline MarginalSpec gaussian(int d) { return MarginalSpec{GaussianMarginal{d}}; }
inline MarginalSpec cube(int d) { return MarginalSpec{CubeMarginal{d}}; }
inline MarginalSpec laplace_product(int d) { return MarginalSpec{LaplaceProductMarginal{d}}; }
inline MarginalSpec student_t_product(int d, int nu) {
  return MarginalSpec{StudentTProductMarginal{d, nu}};
}
inline MarginalSpec point_mass(Point x) { return MarginalSpec{PointMassMarginal{std::move(x)}}; }
inline MarginalSpec mean_shift(MarginalSpec base, std::vector<double> mu) {
  return MarginalSpec{MeanShiftMarginal{boxed(std::move(base)), std::move(mu)}};
}
inline MarginalSpec cov_scale(MarginalSpec base, std::vector<double> scale) {
  return MarginalSpec{CovScaleMarginal{boxed(std::move(base)), std::move(scale)}};
}
inline MarginalSpec band_conditioned(MarginalSpec base, std::vector<double> v, double width) {
  auto h = make_halfspace(std::move(v), 0.0);  // normalizes v
  return MarginalSpec{BandConditionedMarginal{boxed(std::move(base)), std::move(h.v), width}};
}
inline MarginalSpec mixture(std::vector<std::pair<double, MarginalSpec>> comps) {
  MixtureMarginal m;
  double total = 0.0;
  for (auto& [w, spec] : comps) {
    if (!(w >= 0.0)) throw std::invalid_argument("mixture: negative weight");
    total += w;
    m.components.emplace_back(w, boxed(std::move(spec)));
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("mixture: weights must sum to 1");
  return MarginalSpec{std::move(m)};
}

inline int marginal_dim(const MarginalSpec& spec) {
  return std::visit(
      [](const auto& m) -> int {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, GaussianMarginal> || std::is_same_v<T, CubeMarginal> ||
                      std::is_same_v<T, LaplaceProductMarginal> ||
                      std::is_same_v<T, StudentTProductMarginal>) {
          return m.dim;
        } else if constexpr (std::is_same_v<T, PointMassMarginal>) {
          return static_cast<int>(m.x.size());
        } else if constexpr (std::is_same_v<T, MeanShiftMarginal> ||
                             std::is_same_v<T, CovScaleMarginal> ||
                             std::is_same_v<T, BandConditionedMarginal>) {
          return marginal_dim(*m.base);
        } else {
          return m.components.empty() ? 0 : marginal_dim(*m.components.front().second);
        }
      },
      spec.node);
}

enum class SampleMode {
  kIid,
  // Cube only: emits every vertex the same number of times; n must be a
  // multiple of 2^d.
  kStratifiedExact,
};

namespace detail {

inline Point draw_one(const MarginalSpec& spec, Rng& rng, long& attempts_left);

inline Point draw_band_conditioned(const BandConditionedMarginal& m, Rng& rng,
                                   long& attempts_left) {
  while (attempts_left > 0) {
    --attempts_left;
    Point x = draw_one(*m.base, rng, attempts_left);
    double nx = norm2(x);
    if (std::abs(dot(m.v, x)) <= m.width * nx) return x;
  }
  throw std::runtime_error("band-conditioned sampler: rejection cap (1e7 attempts) exceeded");
}

inline Point draw_one(const MarginalSpec& spec, Rng& rng, long& attempts_left) {
  return std::visit(
      [&rng, &attempts_left](const auto& m) -> Point {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, GaussianMarginal>) {
          Point x(static_cast<std::size_t>(m.dim));
          for (double& c : x) c = rng.normal();
          return x;
        } else if constexpr (std::is_same_v<T, CubeMarginal>) {
          Point x(static_cast<std::size_t>(m.dim));
          for (double& c : x) c = static_cast<double>(rng.pm1());
          return x;
        } else if constexpr (std::is_same_v<T, LaplaceProductMarginal>) {
          Point x(static_cast<std::size_t>(m.dim));
          for (double& c : x) c = rng.laplace_unit_variance();
          return x;
        } else if constexpr (std::is_same_v<T, StudentTProductMarginal>) {
          Point x(static_cast<std::size_t>(m.dim));
          for (double& c : x) c = rng.student_t(m.nu);
          return x;
        } else if constexpr (std::is_same_v<T, PointMassMarginal>) {
          return m.x;
        } else if constexpr (std::is_same_v<T, MeanShiftMarginal>) {
          Point x = draw_one(*m.base, rng, attempts_left);
          for (std::size_t i = 0; i < x.size(); ++i) x[i] += m.mu[i];
          return x;
        } else if constexpr (std::is_same_v<T, CovScaleMarginal>) {
          Point x = draw_one(*m.base, rng, attempts_left);
          for (std::size_t i = 0; i < x.size(); ++i) x[i] *= m.scale[i];
          return x;
        } else if constexpr (std::is_same_v<T, BandConditionedMarginal>) {
          return draw_band_conditioned(m, rng, attempts_left);
        } else {
          double u = rng.uniform01();
          double acc = 0.0;
          for (const auto& [w, base] : m.components) {
            acc += w;
            if (u < acc) return draw_one(*base, rng, attempts_left);
          }
          return draw_one(*m.components.back().second, rng, attempts_left);
        }
      },
      spec.node);
}

}  // namespace detail

inline Dataset sample_marginal(const MarginalSpec& spec, int n, Rng rng,
                               SampleMode mode = SampleMode::kIid) {
  if (n < 1) throw std::invalid_argument("sample_marginal: n must be >= 1");
  int d = marginal_dim(spec);
  Dataset out(d);
  out.points.reserve(static_cast<std::size_t>(n));
  if (mode == SampleMode::kStratifiedExact) {
    const auto* cube_spec = std::get_if<CubeMarginal>(&spec.node);
    if (cube_spec == nullptr) {
      throw std::invalid_argument("stratified-exact sampling is defined for the cube only");
    }
    if (d > 30) throw std::invalid_argument("stratified-exact: dimension too large");
    long vertices = 1L << d;
    if (n % vertices != 0) {
      throw std::invalid_argument("stratified-exact: n must be a multiple of 2^d");
    }
    long copies = n / vertices;
    for (long v = 0; v < vertices; ++v) {
      Point x(static_cast<std::size_t>(d));
      for (int i = 0; i < d; ++i) x[static_cast<std::size_t>(i)] = (v >> i) & 1 ? 1.0 : -1.0;
      for (long c = 0; c < copies; ++c) out.points.push_back(x);
    }
    return out;
  }
  long attempts_left = 10000000L;
  for (int i = 0; i < n; ++i) out.points.push_back(detail::draw_one(spec, rng, attempts_left));
  return out;
}

// ---------------------------------------------------------------------------
// Concepts

struct TreeNode;
using TreePtr = std::shared_ptr<const TreeNode>;

// Binary decision tree over +-1 coordinates. Leaf nodes carry the label in
// `leaf`; internal nodes branch on coordinate `var` (-1 side, +1 side).
struct TreeNode {
  int var = -1;
  int leaf = 0;
  TreePtr neg;
  TreePtr pos;

  bool is_leaf() const { return var < 0; }
};

inline TreePtr tree_leaf(int label) {
  auto n = std::make_shared<TreeNode>();
  n->leaf = label;
  return n;
}

inline TreePtr tree_split(int var, TreePtr neg, TreePtr pos) {
  auto n = std::make_shared<TreeNode>();
  n->var = var;
  n->neg = std::move(neg);
  n->pos = std::move(pos);
  return n;
}

inline int tree_depth(const TreePtr& t) {
  if (!t || t->is_leaf()) return 0;
  return 1 + std::max(tree_depth(t->neg), tree_depth(t->pos));
}

struct HomogeneousHalfspaceConcept {
  std::vector<double> v;
};

struct GeneralHalfspaceConcept {
  std::vector<double> v;
  double tau = 0.0;
};

// +1 iff every member halfspace is +1.
struct IntersectionConcept {
  std::vector<GeneralHalfspaceConcept> members;
};

struct DecisionTreeConcept {
  TreePtr root;
  int depth = 0;
};

struct ConstantConcept {
  int label = +1;
};

struct ConceptSpec {
  std::variant<HomogeneousHalfspaceConcept, GeneralHalfspaceConcept, IntersectionConcept,
               DecisionTreeConcept, ConstantConcept>
      node;
};

inline ConceptSpec homogeneous_halfspace_concept(std::vector<double> v) {
  auto h = make_halfspace(std::move(v), 0.0);
  return ConceptSpec{HomogeneousHalfspaceConcept{std::move(h.v)}};
}

inline ConceptSpec general_halfspace_concept(std::vector<double> v, double tau) {
  auto h = make_halfspace(std::move(v), tau);
  return ConceptSpec{GeneralHalfspaceConcept{std::move(h.v), tau}};
}

inline ConceptSpec intersection_concept(std::vector<GeneralHalfspaceConcept> members) {
  if (members.empty()) throw std::invalid_argument("intersection: needs at least one halfspace");
  for (auto& m : members) {
    auto h = make_halfspace(m.v, m.tau);
    m.v = std::move(h.v);
  }
  return ConceptSpec{IntersectionConcept{std::move(members)}};
}

inline ConceptSpec decision_tree_concept(TreePtr root) {
  if (!root) throw std::invalid_argument("decision tree: null root");
  int depth = tree_depth(root);
  return ConceptSpec{DecisionTreeConcept{std::move(root), depth}};
}

inline ConceptSpec constant_concept(int label) { return ConceptSpec{ConstantConcept{label}}; }

namespace detail {

inline int eval_tree(const TreeNode& node, const Point& x) {
  if (node.is_leaf()) return node.leaf;
  double c = x[static_cast<std::size_t>(node.var)];
  if (c != 1.0 && c != -1.0) {
    throw std::invalid_argument("decision tree: point coordinate not in {-1,+1}");
  }
  return eval_tree(c > 0 ? *node.pos : *node.neg, x);
}

}  // namespace detail

inline int evaluate_concept(const ConceptSpec& target, const Point& x) {
  return std::visit(
      [&x](const auto& c) -> int {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, HomogeneousHalfspaceConcept>) {
          return sign_pm(dot(c.v, x));
        } else if constexpr (std::is_same_v<T, GeneralHalfspaceConcept>) {
          return sign_pm(dot(c.v, x) - c.tau);
        } else if constexpr (std::is_same_v<T, IntersectionConcept>) {
          for (const auto& m : c.members) {
            if (sign_pm(dot(m.v, x) - m.tau) < 0) return -1;
          }
          return +1;
        } else if constexpr (std::is_same_v<T, DecisionTreeConcept>) {
          return detail::eval_tree(*c.root, x);
        } else {
          return c.label;
        }
      },
      target.node);
}

// ---------------------------------------------------------------------------
// Label models

struct RealizableLabels {};

struct RandomClassificationNoise {
  double eta = 0.0;  // in [0, 1/2)
};

// Adversarial construction: every label is the negation of the concept.
struct FlipAllLabels {};

struct LabelModel {
  std::variant<RealizableLabels, RandomClassificationNoise, FlipAllLabels> node;
};

inline LabelModel realizable() { return LabelModel{RealizableLabels{}}; }
inline LabelModel rcn(double eta) {
  if (!(eta >= 0.0) || eta >= 0.5) throw std::invalid_argument("rcn: eta must be in [0, 1/2)");
  return LabelModel{RandomClassificationNoise{eta}};
}
inline LabelModel flip_all() { return LabelModel{FlipAllLabels{}}; }

inline LabeledDataset label(const ConceptSpec& target, const LabelModel& model, const Dataset& x,
                            Rng rng) {
  LabeledDataset out(x.dim);
  out.examples.reserve(x.size());
  for (const Point& p : x.points) {
    int y = evaluate_concept(target, p);
    std::visit(
        [&](const auto& m) {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, RandomClassificationNoise>) {
            if (rng.uniform01() < m.eta) y = -y;
          } else if constexpr (std::is_same_v<T, FlipAllLabels>) {
            y = -y;
          }
        },
        model.node);
    out.examples.push_back(LabeledExample{p, y});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Lambda oracle
//
// min over an explicit finite concept grid of train error + test error,
// computed on empirical datasets. Uses the labeled test set the learners
// never see; reported values are grid minima ("grid-lambda"), which only
// shrink as the grid is refined.

using Classifier = std::function<int(const Point&)>;

namespace detail {

struct WeightedExamples {
  std::vector<std::pair<Point, int>> distinct;
  std::vector<long> counts;
  long total = 0;
};

inline WeightedExamples dedup(const LabeledDataset& s) {
  std::map<std::pair<Point, int>, long> m;
  for (const auto& e : s.examples) ++m[{e.x, e.y}];
  WeightedExamples w;
  w.total = static_cast<long>(s.size());
  for (auto& [key, count] : m) {
    w.distinct.push_back(key);
    w.counts.push_back(count);
  }
  return w;
}

inline double weighted_error(const Classifier& f, const WeightedExamples& w) {
  long wrong = 0;
  for (std::size_t i = 0; i < w.distinct.size(); ++i) {
    if (f(w.distinct[i].first) != w.distinct[i].second) wrong += w.counts[i];
  }
  return static_cast<double>(wrong) / static_cast<double>(w.total);
}

}  // namespace detail

inline double lambda_oracle(const std::vector<Classifier>& grid, const LabeledDataset& s_train,
                            const LabeledDataset& s_test) {
  if (grid.empty()) throw std::invalid_argument("lambda_oracle: empty grid");
  if (s_train.empty() || s_test.empty()) {
    throw std::invalid_argument("lambda_oracle: empty dataset");
  }
  auto wtr = detail::dedup(s_train);
  auto wte = detail::dedup(s_test);
  double best = 2.0;
  for (const auto& f : grid) {
    double v = detail::weighted_error(f, wtr) + detail::weighted_error(f, wte);
    if (v < best) best = v;
  }
  return best;
}

// Halfspace grid in d=2: evenly spaced directions crossed with evenly
// spaced offsets over [-offset_range, offset_range] (0 is always included).
inline std::vector<Classifier> halfspace_grid_2d(int directions, int offsets,
                                                 double offset_range) {
  if (directions < 1 || offsets < 1) throw std::invalid_argument("halfspace grid: empty");
  std::vector<Classifier> grid;
  grid.reserve(static_cast<std::size_t>(directions) * static_cast<std::size_t>(offsets));
  for (int i = 0; i < directions; ++i) {
    double ang = 2.0 * 3.14159265358979323846 * static_cast<double>(i) / directions;
    double vx = std::cos(ang);
    double vy = std::sin(ang);
    for (int j = 0; j < offsets; ++j) {
      double tau = offsets == 1 ? 0.0
                                : -offset_range + 2.0 * offset_range * static_cast<double>(j) /
                                                      static_cast<double>(offsets - 1);
      grid.push_back([vx, vy, tau](const Point& x) {
        return sign_pm(vx * x[0] + vy * x[1] - tau);
      });
    }
  }
  return grid;
}

// Exhaustive grid of depth <= 2 decision trees over the first `vars`
// coordinates (constants, stumps, and all two-level trees).
inline std::vector<Classifier> tree_grid_depth2(int vars) {
  if (vars < 1) throw std::invalid_argument("tree grid: need at least one variable");
  std::vector<TreePtr> subtrees;  // depth <= 1
  subtrees.push_back(tree_leaf(+1));
  subtrees.push_back(tree_leaf(-1));
  for (int v = 0; v < vars; ++v) {
    for (int ln : {+1, -1}) {
      for (int rn : {+1, -1}) {
        subtrees.push_back(tree_split(v, tree_leaf(ln), tree_leaf(rn)));
      }
    }
  }
  std::vector<TreePtr> trees = subtrees;
  for (int v = 0; v < vars; ++v) {
    for (const auto& left : subtrees) {
      for (const auto& right : subtrees) {
        trees.push_back(tree_split(v, left, right));
      }
    }
  }
  std::vector<Classifier> grid;
  grid.reserve(trees.size());
  for (const auto& t : trees) {
    grid.push_back([t](const Point& x) { return detail::eval_tree(*t, x); });
  }
  return grid;
}

// {f, -f} for a given concept; the negation-closed pair used to pin the
// error floor of label-flip scenarios.
inline std::vector<Classifier> concept_pair_grid(const ConceptSpec& target) {
  std::vector<Classifier> grid;
  grid.push_back([target](const Point& x) { return evaluate_concept(target, x); });
  grid.push_back([target](const Point& x) { return -evaluate_concept(target, x); });
  return grid;
}

}  // namespace tds::scenarios
