#pragma once

// JSON forms of the externally visible types: polynomials, halfspaces,
// hypotheses, moment reports, outcomes, and scenario specs. Shapes are part
// of the harness's output contract.

#include <json.hpp>

#include "tds/core.hpp"
#include "tds/halfspaces.hpp"
#include "tds/moments.hpp"
#include "tds/scenarios.hpp"

namespace tds {

inline void to_json(nlohmann::json& j, const SparsePolynomial& p) {
  j = nlohmann::json{{"dim", p.dim}, {"degree", p.degree_bound}, {"terms", nlohmann::json::array()}};
  for (const auto& [alpha, coef] : p.terms) {
    j["terms"].push_back(nlohmann::json{{"alpha", alpha}, {"coef", coef}});
  }
}

inline void to_json(nlohmann::json& j, const Halfspace& h) {
  j = nlohmann::json{{"v", h.v}, {"tau", h.tau}};
}

inline void to_json(nlohmann::json& j, const Hypothesis& h);

inline void to_json(nlohmann::json& j, const ConstantHypothesis& c) {
  j = nlohmann::json{{"type", "constant"}, {"label", c.label}};
}

inline void to_json(nlohmann::json& j, const PolySignHypothesis& p) {
  j = nlohmann::json{{"type", "poly_sign"}, {"poly", p.poly}};
}

inline void to_json(nlohmann::json& j, const MajorityHypothesis& m) {
  j = nlohmann::json{{"type", "majority"}, {"members", nlohmann::json::array()}};
  for (const auto& member : m.members) j["members"].push_back(member);
}

inline void to_json(nlohmann::json& j, const Hypothesis& h) {
  std::visit(
      [&j](const auto& node) {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, Halfspace>) {
          j = nlohmann::json{{"type", "halfspace"}, {"v", node.v}, {"tau", node.tau}};
        } else {
          to_json(j, node);
        }
      },
      h.node);
}

inline void to_json(nlohmann::json& j, const Diagnostics& d) {
  j = nlohmann::json{{"branch", d.branch}, {"values", d.values}, {"notes", d.notes}};
}

inline void to_json(nlohmann::json& j, const TdsOutcome& o) {
  j = nlohmann::json{{"verdict", o.accepted() ? "accept" : "reject"},
                     {"diagnostics", o.diagnostics}};
  if (o.hypothesis.has_value()) j["hypothesis"] = *o.hypothesis;
}

namespace moments {

inline void to_json(nlohmann::json& j, const MomentRecord& r) {
  j = nlohmann::json{
      {"alpha", r.alpha}, {"empirical", r.empirical}, {"reference", r.reference}, {"gap", r.gap}};
}

inline void to_json(nlohmann::json& j, const MomentReport& r) {
  j = nlohmann::json{{"records", r.records},
                     {"worst_gap", r.worst_gap},
                     {"worst_alpha", r.worst_alpha}};
}

}  // namespace moments

namespace scenarios {

inline void to_json(nlohmann::json& j, const MarginalSpec& spec) {
  std::visit(
      [&j](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, GaussianMarginal>) {
          j = nlohmann::json{{"type", "gaussian"}, {"dim", m.dim}};
        } else if constexpr (std::is_same_v<T, CubeMarginal>) {
          j = nlohmann::json{{"type", "cube"}, {"dim", m.dim}};
        } else if constexpr (std::is_same_v<T, LaplaceProductMarginal>) {
          j = nlohmann::json{{"type", "laplace"}, {"dim", m.dim}};
        } else if constexpr (std::is_same_v<T, StudentTProductMarginal>) {
          j = nlohmann::json{{"type", "student_t"}, {"dim", m.dim}, {"nu", m.nu}};
        } else if constexpr (std::is_same_v<T, PointMassMarginal>) {
          j = nlohmann::json{{"type", "point_mass"}, {"x", m.x}};
        } else if constexpr (std::is_same_v<T, MeanShiftMarginal>) {
          j = nlohmann::json{{"type", "mean_shift"}, {"base", *m.base}, {"mu", m.mu}};
        } else if constexpr (std::is_same_v<T, CovScaleMarginal>) {
          j = nlohmann::json{{"type", "cov_scale"}, {"base", *m.base}, {"scale", m.scale}};
        } else if constexpr (std::is_same_v<T, BandConditionedMarginal>) {
          j = nlohmann::json{
              {"type", "band"}, {"base", *m.base}, {"v", m.v}, {"width", m.width}};
        } else {
          j = nlohmann::json{{"type", "mixture"}, {"components", nlohmann::json::array()}};
          for (const auto& [w, base] : m.components) {
            j["components"].push_back(nlohmann::json{{"weight", w}, {"base", *base}});
          }
        }
      },
      spec.node);
}

inline void to_json(nlohmann::json& j, const TreePtr& t) {
  if (!t) throw std::invalid_argument("tree serialization: null node");
  if (t->is_leaf()) {
    j = nlohmann::json{{"leaf", t->leaf}};
  } else {
    j = nlohmann::json{{"var", t->var}, {"neg", t->neg}, {"pos", t->pos}};
  }
}

inline void to_json(nlohmann::json& j, const ConceptSpec& spec) {
  std::visit(
      [&j](const auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, HomogeneousHalfspaceConcept>) {
          j = nlohmann::json{{"type", "homogeneous_halfspace"}, {"v", c.v}};
        } else if constexpr (std::is_same_v<T, GeneralHalfspaceConcept>) {
          j = nlohmann::json{{"type", "general_halfspace"}, {"v", c.v}, {"tau", c.tau}};
        } else if constexpr (std::is_same_v<T, IntersectionConcept>) {
          j = nlohmann::json{{"type", "intersection"}, {"halfspaces", nlohmann::json::array()}};
          for (const auto& m : c.members) {
            j["halfspaces"].push_back(nlohmann::json{{"v", m.v}, {"tau", m.tau}});
          }
        } else if constexpr (std::is_same_v<T, DecisionTreeConcept>) {
          j = nlohmann::json{{"type", "decision_tree"}, {"tree", c.root}};
        } else {
          j = nlohmann::json{{"type", "constant"}, {"label", c.label}};
        }
      },
      spec.node);
}

inline void to_json(nlohmann::json& j, const LabelModel& model) {
  std::visit(
      [&j](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, RealizableLabels>) {
          j = nlohmann::json{{"type", "realizable"}};
        } else if constexpr (std::is_same_v<T, RandomClassificationNoise>) {
          j = nlohmann::json{{"type", "rcn"}, {"eta", m.eta}};
        } else {
          j = nlohmann::json{{"type", "flip_all"}};
        }
      },
      model.node);
}

}  // namespace scenarios
}  // namespace tds
