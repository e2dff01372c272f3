#include <gtest/gtest.h>

#include <cmath>

#include "tds/core.hpp"

using namespace tds;

TEST(Sign, ZeroIsPositive) {
  EXPECT_EQ(sign_pm(0.0), +1);
  EXPECT_EQ(sign_pm(-0.0), +1);
  EXPECT_EQ(sign_pm(1e-300), +1);
  EXPECT_EQ(sign_pm(-1e-300), -1);
}

TEST(EvalHypothesis, HalfspacePositiveSide) {
  auto h = halfspace_hypothesis({1.0, 0.0}, 0.0);
  EXPECT_EQ(eval_hypothesis(h, {2.0, 5.0}), +1);
}

TEST(EvalHypothesis, HalfspaceOnBoundaryUsesSignZeroConvention) {
  auto h = halfspace_hypothesis({1.0, 0.0}, 0.0);
  EXPECT_EQ(eval_hypothesis(h, {0.0, 3.0}), +1);
}

TEST(EvalHypothesis, MajorityTwoOfThree) {
  auto h = majority_hypothesis(
      {constant_hypothesis(+1), constant_hypothesis(+1), constant_hypothesis(-1)});
  EXPECT_EQ(eval_hypothesis(h, {0.0}), +1);
  EXPECT_EQ(eval_hypothesis(h, {123.0}), +1);
}

TEST(EvalHypothesis, PolySign) {
  SparsePolynomial p(2, 2, 2.0);
  p.set_coefficient({1, 0}, 1.0);
  p.set_coefficient({0, 2}, -0.5);
  auto h = poly_sign_hypothesis(p);
  EXPECT_EQ(eval_hypothesis(h, {1.0, 1.0}), +1);   // 0.5
  EXPECT_EQ(eval_hypothesis(h, {0.0, 2.0}), -1);   // -2
  EXPECT_EQ(eval_hypothesis(h, {2.0, 2.0}), +1);   // sign(0)
}

TEST(EvalHypothesis, DimensionMismatchThrows) {
  auto h = halfspace_hypothesis({1.0, 0.0}, 0.0);
  EXPECT_THROW(eval_hypothesis(h, {1.0}), std::invalid_argument);
}

TEST(EvalHypothesis, TotalOnFiniteInputs) {
  Rng rng(7);
  SparsePolynomial p(3, 3, 2.0);
  p.set_coefficient({1, 1, 1}, 1.5);
  p.set_coefficient({3, 0, 0}, -2.0);
  std::vector<Hypothesis> hs{constant_hypothesis(-1), halfspace_hypothesis({0.3, -2.0, 1.0}, 0.7),
                             poly_sign_hypothesis(p)};
  hs.push_back(majority_hypothesis({hs[0], hs[1], hs[2]}));
  for (int i = 0; i < 2000; ++i) {
    Point x{rng.normal() * 1e3, rng.normal(), rng.uniform(-1e6, 1e6)};
    for (const auto& h : hs) {
      int v = eval_hypothesis(h, x);
      ASSERT_TRUE(v == +1 || v == -1);
    }
  }
}

TEST(Halfspace, RenormalizesOnConstruction) {
  auto h = make_halfspace({3.0, 4.0}, 1.0);
  EXPECT_NEAR(norm2(h.v), 1.0, 1e-9);
  EXPECT_NEAR(h.v[0], 0.6, 1e-12);
  EXPECT_THROW(make_halfspace({0.0, 0.0}, 0.0), std::invalid_argument);
}

TEST(Majority, RequiresOddLength) {
  EXPECT_THROW(majority_hypothesis({}), std::invalid_argument);
  EXPECT_THROW(majority_hypothesis({constant_hypothesis(+1), constant_hypothesis(-1)}),
               std::invalid_argument);
}

TEST(EmpiricalError, GroundTruthIsZeroAndNegationIsOne) {
  Rng rng(11);
  LabeledDataset s(2);
  auto h = halfspace_hypothesis({0.6, -0.8}, 0.1);
  for (int i = 0; i < 200; ++i) {
    Point x{rng.normal(), rng.normal()};
    s.add(x, eval_hypothesis(h, x));
  }
  EXPECT_EQ(empirical_error(h, s), 0.0);
  EXPECT_EQ(empirical_error_negated(h, s), 1.0);
}

TEST(EmpiricalError, HalfWrong) {
  LabeledDataset s(1);
  s.add({1.0}, +1);
  s.add({-1.0}, +1);
  auto h = halfspace_hypothesis({1.0}, 0.0);
  EXPECT_DOUBLE_EQ(empirical_error(h, s), 0.5);
}

TEST(EmpiricalError, ComplementIdentityHoldsForEveryHypothesis) {
  Rng rng(13);
  for (int rep = 0; rep < 50; ++rep) {
    Rng sub = rng.substream(static_cast<std::uint64_t>(rep));
    LabeledDataset s(2);
    for (int i = 0; i < 37; ++i) {
      // Include exact zeros so sign(0) ties are exercised.
      double a = (i % 5 == 0) ? 0.0 : sub.normal();
      s.add({a, sub.normal()}, sub.pm1());
    }
    SparsePolynomial p(2, 2, 2.0);
    p.set_coefficient({1, 0}, sub.uniform(-2.0, 2.0));
    p.set_coefficient({0, 1}, sub.uniform(-2.0, 2.0));
    std::vector<Hypothesis> hs{constant_hypothesis(sub.pm1()),
                               halfspace_hypothesis({sub.normal(), sub.normal() + 3.0}, 0.0),
                               poly_sign_hypothesis(p)};
    hs.push_back(majority_hypothesis({hs[0], hs[1], hs[2]}));
    for (const auto& h : hs) {
      EXPECT_DOUBLE_EQ(empirical_error(h, s) + empirical_error_negated(h, s), 1.0);
    }
  }
}

TEST(EmpiricalError, EmptyDatasetThrows) {
  LabeledDataset s(1);
  EXPECT_THROW(empirical_error(constant_hypothesis(+1), s), std::invalid_argument);
}

TEST(Negate, StructuralFormsMatchAwayFromBoundaries) {
  Rng rng(17);
  auto h = halfspace_hypothesis({0.8, 0.6}, -0.25);
  auto n = negate(h);
  for (int i = 0; i < 1000; ++i) {
    Point x{rng.normal(), rng.normal()};
    EXPECT_EQ(eval_hypothesis(n, x), -eval_hypothesis(h, x));
  }
  EXPECT_EQ(eval_hypothesis(negate(constant_hypothesis(+1)), {0.0, 0.0}), -1);
}

TEST(Dataset, ValidationRejectsBadInput) {
  Dataset x(2);
  EXPECT_THROW(x.add({1.0}), std::invalid_argument);
  EXPECT_THROW(x.add({1.0, std::nan("")}), std::invalid_argument);
  LabeledDataset s(1);
  EXPECT_THROW(s.add({1.0}, 0), std::invalid_argument);
  EXPECT_THROW(s.add({1.0}, 2), std::invalid_argument);
}

TEST(SparsePolynomial, EnforcesDegreeAndCoefficientBounds) {
  SparsePolynomial p(2, 2, 1.5);
  EXPECT_THROW(p.set_coefficient({2, 1}, 0.5), std::invalid_argument);
  EXPECT_THROW(p.set_coefficient({1, 0}, 2.0), std::invalid_argument);
  p.set_coefficient({1, 1}, -1.5);
  EXPECT_DOUBLE_EQ(p.evaluate({2.0, 3.0}), -9.0);
  EXPECT_DOUBLE_EQ(p.coefficient({0, 0}), 0.0);
}

TEST(Constants, Validation) {
  Constants c;
  EXPECT_NO_THROW(c.validate());
  c.amplification_t = 7;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c.amplification_t = 20;
  c.c1 = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Rng, SameSeedSameStream) {
  Rng a(123);
  Rng b(123);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
}

TEST(Rng, SubstreamsIndependentOfConsumptionOrder) {
  Rng base(99);
  Rng before = base.substream(5);
  // Consuming from the parent or from other substreams must not disturb a
  // substream's output.
  base.next_u64();
  base.substream(4).next_u64();
  Rng after = base.substream(5);
  for (int i = 0; i < 100; ++i) ASSERT_EQ(before.next_u64(), after.next_u64());
}

TEST(Rng, DistinctSubstreamsDiffer) {
  Rng base(99);
  EXPECT_NE(base.substream(0).next_u64(), base.substream(1).next_u64());
}

TEST(Rng, NormalMomentsSane) {
  Rng rng(2024);
  double sum = 0.0;
  double sum2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    double z = rng.normal();
    sum += z;
    sum2 += z * z;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.01);
  EXPECT_NEAR(sum2 / n, 1.0, 0.02);
}

TEST(Rng, LaplaceUnitVariance) {
  Rng rng(2025);
  double sum2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    double z = rng.laplace_unit_variance();
    sum2 += z * z;
  }
  EXPECT_NEAR(sum2 / n, 1.0, 0.03);
}

TEST(Rng, StudentTHeavyTailVariance) {
  Rng rng(2026);
  double sum2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    double z = rng.student_t(3);
    sum2 += z * z;
  }
  // Var = nu/(nu-2) = 3; wide band, the tails are heavy.
  EXPECT_GT(sum2 / n, 2.0);
  EXPECT_LT(sum2 / n, 4.5);
}

TEST(TdsOutcome, AcceptCarriesHypothesis) {
  Diagnostics d;
  d.branch = "test";
  auto accept = TdsOutcome::accept(constant_hypothesis(+1), d);
  EXPECT_TRUE(accept.accepted());
  EXPECT_TRUE(accept.hypothesis.has_value());
  auto reject = TdsOutcome::reject(d);
  EXPECT_FALSE(reject.accepted());
  EXPECT_FALSE(reject.hypothesis.has_value());
}
