#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "tds/halfspaces.hpp"
#include "tds/scenarios.hpp"

using namespace tds;
using namespace tds::halfspaces;

namespace {

std::vector<double> unit(std::vector<double> v) {
  double n = norm2(v);
  for (double& c : v) c /= n;
  return v;
}

LabeledDataset label_by_direction(const Dataset& x, const std::vector<double>& v, double tau = 0.0) {
  LabeledDataset s(x.dim);
  for (const auto& p : x.points) s.add(p, sign_pm(dot(v, p) - tau));
  return s;
}

// Brute-force direction grid: a lower bar no candidate-based ERM may lose to.
long best_grid_errors_2d(const LabeledDataset& s, int grid) {
  long best = static_cast<long>(s.size()) + 1;
  for (int i = 0; i < grid; ++i) {
    double a = 2.0 * kPi * i / grid;
    std::vector<double> v{std::cos(a), std::sin(a)};
    long err = 0;
    for (const auto& e : s.examples) {
      if (sign_pm(dot(v, e.x)) != e.y) ++err;
    }
    best = std::min(best, err);
  }
  return best;
}

long errors_of(const LabeledDataset& s, const std::vector<double>& v) {
  long err = 0;
  for (const auto& e : s.examples) {
    if (sign_pm(dot(v, e.x)) != e.y) ++err;
  }
  return err;
}

}  // namespace

TEST(Angle, Examples) {
  EXPECT_NEAR(angle({1.0, 0.0}, {0.0, 1.0}), kPi / 2.0, 1e-12);
  std::vector<double> v = unit({0.3, -1.2});
  EXPECT_NEAR(angle(v, v), 0.0, 1e-7);
  std::vector<double> neg{-v[0], -v[1]};
  EXPECT_NEAR(angle(v, neg), kPi, 1e-7);
  EXPECT_THROW(angle({0.0, 0.0}, {1.0, 0.0}), std::invalid_argument);
}

TEST(Angle, SymmetryAndTriangleInequality) {
  Rng rng(1);
  for (int i = 0; i < 10000; ++i) {
    std::vector<double> a = unit({rng.normal(), rng.normal(), rng.normal()});
    std::vector<double> b = unit({rng.normal(), rng.normal(), rng.normal()});
    std::vector<double> c = unit({rng.normal(), rng.normal(), rng.normal()});
    double ab = angle(a, b);
    ASSERT_DOUBLE_EQ(ab, angle(b, a));
    ASSERT_LE(ab, angle(a, c) + angle(c, b) + 1e-9);
  }
}

TEST(GaussianDisagreement, ClosedFormValues) {
  EXPECT_DOUBLE_EQ(gaussian_disagreement({1.0, 0.0}, {0.0, 1.0}), 0.5);
  std::vector<double> v = unit({2.0, 1.0});
  EXPECT_NEAR(gaussian_disagreement(v, v), 0.0, 1e-7);
}

TEST(GaussianDisagreement, MonteCarloMatchesAngleOverPi) {
  const int n = 100000;
  auto x = scenarios::sample_marginal(scenarios::gaussian(2), n, Rng(2));
  std::vector<double> v1{1.0, 0.0};
  std::vector<double> v2{std::cos(0.3), std::sin(0.3)};
  long disagree = 0;
  for (const auto& p : x.points) {
    if (sign_pm(dot(v1, p)) != sign_pm(dot(v2, p))) ++disagree;
  }
  double p_hat = static_cast<double>(disagree) / n;
  double p_true = 0.3 / kPi;
  double sigma = std::sqrt(p_true * (1.0 - p_true) / n);
  EXPECT_NEAR(p_hat, p_true, 3.0 * sigma);
}

TEST(DisagreementEvent, ContainedInAngularBand) {
  Rng rng(3);
  for (int i = 0; i < 100000; ++i) {
    std::vector<double> v = unit({rng.normal(), rng.normal(), rng.normal()});
    double phi = rng.uniform01() * kPi / 2.0;
    Rng sub = rng.substream(static_cast<std::uint64_t>(i));
    std::vector<double> v2 = unit_at_angle(v, phi, sub);
    Point x{rng.normal(), rng.normal(), rng.normal()};
    if (sign_pm(dot(v, x)) != sign_pm(dot(v2, x))) {
      ASSERT_LE(std::abs(dot(v, x)), std::sin(angle(v, v2)) * norm2(x) + 1e-9);
    }
  }
}

TEST(UnitAtAngle, ProducesRequestedAngle) {
  Rng rng(4);
  std::vector<double> v = unit({1.0, 2.0, -0.5, 0.25});
  for (double phi : {0.01, 0.3, 1.2}) {
    auto w = unit_at_angle(v, phi, rng);
    EXPECT_NEAR(norm2(w), 1.0, 1e-9);
    EXPECT_NEAR(angle(v, w), phi, 1e-9);
  }
}

TEST(ChowDirection, AxisExample) {
  LabeledDataset s(2);
  s.add({2.0, 0.0}, +1);
  s.add({-2.0, 0.0}, -1);
  auto v = chow_direction(s);
  EXPECT_NEAR(v[0], 1.0, 1e-12);
  EXPECT_NEAR(v[1], 0.0, 1e-12);
}

TEST(ChowDirection, DegenerateSumThrows) {
  LabeledDataset s(2);
  s.add({1.0, 0.0}, +1);
  s.add({-1.0, 0.0}, +1);
  EXPECT_THROW(chow_direction(s), DegenerateChowError);
}

TEST(ChowDirection, RecoversNormalFromGaussianSample) {
  auto x = scenarios::sample_marginal(scenarios::gaussian(3), 10000, Rng(5));
  std::vector<double> v{1.0, 0.0, 0.0};
  auto s = label_by_direction(x, v);
  auto v_hat = chow_direction(s);
  EXPECT_LE(angle(v_hat, v), 0.05);
}

TEST(ChowDirection, RotationEquivariant) {
  auto x = scenarios::sample_marginal(scenarios::gaussian(2), 500, Rng(6));
  std::vector<double> v = unit({0.8, -0.6});
  auto s = label_by_direction(x, v);
  auto v_hat = chow_direction(s);

  const double a = 0.7;
  auto rotate = [a](const Point& p) {
    return Point{std::cos(a) * p[0] - std::sin(a) * p[1],
                 std::sin(a) * p[0] + std::cos(a) * p[1]};
  };
  LabeledDataset rotated(2);
  for (const auto& e : s.examples) rotated.add(rotate(e.x), e.y);
  auto v_rot = chow_direction(rotated);
  auto expected = rotate(v_hat);
  EXPECT_NEAR(v_rot[0], expected[0], 1e-9);
  EXPECT_NEAR(v_rot[1], expected[1], 1e-9);
}

TEST(RecoverOffset, HandEnumeratedCandidates) {
  std::vector<double> v{1.0, 0.0};
  LabeledDataset s(2);
  s.add({-1.0, 0.0}, -1);
  s.add({0.5, 0.0}, +1);
  s.add({2.0, 0.0}, +1);
  double tau = recover_offset(s, v);
  EXPECT_DOUBLE_EQ(tau, 0.5);
  EXPECT_EQ(empirical_error(halfspace_hypothesis(v, tau), s), 0.0);
}

TEST(RecoverOffset, AllPositiveLabelsPickSmallestProjection) {
  std::vector<double> v{1.0};
  LabeledDataset s(1);
  s.add({0.7}, +1);
  s.add({-0.3}, +1);
  s.add({2.0}, +1);
  EXPECT_DOUBLE_EQ(recover_offset(s, v), -0.3);
}

TEST(RecoverOffset, ExactThresholdAmongProjections) {
  std::vector<double> v{1.0};
  LabeledDataset s(1);
  for (double p : {0.0, 1.0, 2.0}) s.add({p}, sign_pm(p - 1.0));
  EXPECT_DOUBLE_EQ(recover_offset(s, v), 1.0);
}

TEST(RecoverOffset, ZeroErrorWheneverLabelsAreThresholdRealizable) {
  Rng rng(7);
  for (int rep = 0; rep < 100; ++rep) {
    Rng sub = rng.substream(static_cast<std::uint64_t>(rep));
    std::vector<double> v = unit({sub.normal(), sub.normal(), sub.normal()});
    double tau_star = sub.uniform(-1.5, 1.5);
    auto x = scenarios::sample_marginal(scenarios::gaussian(3), 60, sub.substream(1));
    auto s = label_by_direction(x, v, tau_star);
    double tau_hat = recover_offset(s, v);
    ASSERT_EQ(empirical_error(halfspace_hypothesis(v, tau_hat), s), 0.0) << "rep " << rep;
  }
}

TEST(ErmHomogeneous, SeparableIsZeroErrorInLowDim) {
  Rng rng(8);
  for (int d : {1, 2, 3}) {
    auto x = scenarios::sample_marginal(scenarios::gaussian(d), d == 3 ? 60 : 200,
                                        rng.substream(static_cast<std::uint64_t>(d)));
    std::vector<double> v(static_cast<std::size_t>(d), 0.0);
    v[0] = 0.6;
    v[static_cast<std::size_t>(d - 1)] += 0.8;
    v = unit(v);
    auto s = label_by_direction(x, v);
    auto v_hat = erm_homogeneous(s, Rng(100 + d));
    EXPECT_EQ(errors_of(s, v_hat), 0) << "d = " << d;
  }
}

TEST(ErmHomogeneous, AxisConcept50Points) {
  auto x = scenarios::sample_marginal(scenarios::gaussian(2), 50, Rng(9));
  auto s = label_by_direction(x, {1.0, 0.0});
  auto v_hat = erm_homogeneous(s, Rng(10));
  EXPECT_EQ(errors_of(s, v_hat), 0);
}

TEST(ErmHomogeneous, NoisySampleBeatsDenseDirectionGrid) {
  auto x = scenarios::sample_marginal(scenarios::gaussian(2), 200, Rng(11));
  auto s = label_by_direction(x, unit({1.0, 0.4}));
  Rng noise(12);
  long flipped = 0;
  for (auto& e : s.examples) {
    if (noise.uniform01() < 0.05) {
      e.y = -e.y;
      ++flipped;
    }
  }
  ASSERT_GT(flipped, 0);
  auto v_hat = erm_homogeneous(s, Rng(13));
  long err = errors_of(s, v_hat);
  EXPECT_LE(err, flipped);  // the true direction misses only the flips
  EXPECT_LE(static_cast<double>(err) / 200.0, 0.05);
  EXPECT_LE(err, best_grid_errors_2d(s, 7200));
}

TEST(ErmHomogeneous, SweepMatchesGridOnAdversarialTies) {
  // Duplicate points, exact zeros and opposite labels stress the sign(0)
  // bookkeeping of the circular sweep.
  LabeledDataset s(2);
  s.add({0.0, 0.0}, -1);
  s.add({1.0, 0.0}, +1);
  s.add({1.0, 0.0}, -1);
  s.add({-1.0, 0.0}, +1);
  s.add({0.0, 1.0}, -1);
  s.add({0.0, -1.0}, -1);
  s.add({2.0, 0.0}, +1);
  auto v_hat = erm_homogeneous(s, Rng(14));
  EXPECT_LE(errors_of(s, v_hat), best_grid_errors_2d(s, 14400));
}

TEST(ErmHomogeneous, ThreeDimensionalPairEnumeration) {
  auto x = scenarios::sample_marginal(scenarios::gaussian(3), 40, Rng(15));
  auto s = label_by_direction(x, unit({0.2, -1.0, 0.5}));
  Rng noise(16);
  for (auto& e : s.examples) {
    if (noise.uniform01() < 0.1) e.y = -e.y;
  }
  auto v_hat = erm_homogeneous(s, Rng(17));
  // Fibonacci sphere grid as an independent lower bar.
  long best_grid = static_cast<long>(s.size()) + 1;
  const int m = 20000;
  for (int i = 0; i < m; ++i) {
    double z = 1.0 - 2.0 * (i + 0.5) / m;
    double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    double a = 2.39996322972865332 * i;
    std::vector<double> v{r * std::cos(a), r * std::sin(a), z};
    best_grid = std::min(best_grid, errors_of(s, v));
  }
  EXPECT_LE(errors_of(s, v_hat), best_grid);
}

TEST(ErmHomogeneous, HeuristicPoolInHigherDimension) {
  auto x = scenarios::sample_marginal(scenarios::gaussian(5), 300, Rng(18));
  auto s = label_by_direction(x, unit({1.0, 1.0, 0.0, -1.0, 0.5}));
  auto v_hat = erm_homogeneous(s, Rng(19));
  EXPECT_LE(static_cast<double>(errors_of(s, v_hat)) / 300.0, 0.03);
}

TEST(BandFraction, Examples) {
  Dataset x(2);
  x.add({1.0, 0.0});
  x.add({0.0, 1.0});
  std::vector<double> v{1.0, 0.0};
  double f = band_fraction(x, v, 0.0, [](const Point& p) { return 0.5 * norm2(p); });
  EXPECT_DOUBLE_EQ(f, 0.5);
  double z = band_fraction(x, v, 0.0, [](const Point&) { return 0.0; });
  EXPECT_DOUBLE_EQ(z, 0.0);
  Dataset empty(2);
  EXPECT_THROW(band_fraction(empty, v, 0.0, [](const Point&) { return 1.0; }),
               std::invalid_argument);
}

TEST(BandFraction, GaussianBandMassMatchesDensityBound) {
  const int n = 100000;
  auto x = scenarios::sample_marginal(scenarios::gaussian(2), n, Rng(20));
  std::vector<double> v{1.0, 0.0};
  double f = band_fraction(x, v, 0.0, [](const Point& p) { return 0.1 * norm2(p); });
  EXPECT_LE(f, 0.12);
  EXPECT_GT(f, 0.02);
}

TEST(CapTester, FarSymmetricPairsPassWithZeroMass) {
  Dataset x(2);
  for (double a : {5.0, 7.0, 11.0}) {
    x.add({a, a});
    x.add({-a, -a});
    x.add({a, -a});
    x.add({-a, a});
  }
  std::vector<double> v{1.0, 0.0};
  auto res = cap_disagreement_tester(x, v, CapTesterConfig{0.2, 6, 4.0, 0.01});
  EXPECT_TRUE(res.pass);
  for (const auto& lvl : res.levels) EXPECT_DOUBLE_EQ(lvl.band_fraction, 0.0);
}

TEST(CapTester, HyperplaneMassFailsEveryLevel) {
  Dataset x(2);
  for (int i = 1; i <= 20; ++i) x.add({0.0, static_cast<double>(i)});
  std::vector<double> v{1.0, 0.0};
  auto res = cap_disagreement_tester(x, v, CapTesterConfig{0.2, 6, 4.0, 0.01});
  EXPECT_FALSE(res.pass);
  for (const auto& lvl : res.levels) EXPECT_FALSE(lvl.ok);
}

TEST(CapTester, LogConcaveCompleteness) {
  auto x = scenarios::sample_marginal(scenarios::laplace_product(2), 100000, Rng(21));
  std::vector<double> v = unit({1.0, 0.3});
  auto res = cap_disagreement_tester(x, v, CapTesterConfig{0.2, 6, 4.0, 0.01});
  EXPECT_TRUE(res.pass);
}

TEST(CapTester, ThetaDomainEnforced) {
  Dataset x(2);
  x.add({1.0, 1.0});
  std::vector<double> v{1.0, 0.0};
  EXPECT_THROW(cap_disagreement_tester(x, v, CapTesterConfig{0.0, 6, 4.0, 0.01}),
               std::invalid_argument);
  EXPECT_THROW(cap_disagreement_tester(x, v, CapTesterConfig{1.0, 6, 4.0, 0.01}),
               std::invalid_argument);
}

TEST(CapTester, PassCertifiesDisagreementBoundConstructively) {
  auto x = scenarios::sample_marginal(scenarios::gaussian(3), 20000, Rng(22));
  std::vector<double> v = unit({1.0, -0.5, 0.2});
  CapTesterConfig cfg{0.25, 6, 4.0, 0.01};
  auto res = cap_disagreement_tester(x, v, cfg);
  ASSERT_TRUE(res.pass);
  Rng rng(23);
  for (int i = 0; i < 100; ++i) {
    double phi = rng.uniform01() * cfg.theta;
    auto v2 = unit_at_angle(v, phi, rng);
    long disagree = 0;
    for (const auto& p : x.points) {
      if (sign_pm(dot(v, p)) != sign_pm(dot(v2, p))) ++disagree;
    }
    double frac = static_cast<double>(disagree) / static_cast<double>(x.size());
    ASSERT_LE(frac, cfg.c * angle(v, v2) + cfg.eps_add + res.residual + 1e-12);
  }
}

TEST(AgnosticLearnStub, RealizableSeparable) {
  auto x = scenarios::sample_marginal(scenarios::gaussian(2), 1000, Rng(24));
  auto s = label_by_direction(x, unit({0.7, 0.7}));
  auto v = agnostic_learn_stub(s, 0.1, 0.05, Rng(25));
  EXPECT_LE(static_cast<double>(errors_of(s, v)) / 1000.0, 0.05);
}

TEST(AgnosticLearnStub, NoisyLearnsCloseToExactErm) {
  auto x = scenarios::sample_marginal(scenarios::gaussian(2), 5000, Rng(26));
  auto s = label_by_direction(x, unit({1.0, 0.0}));
  Rng noise(27);
  for (auto& e : s.examples) {
    if (noise.uniform01() < 0.1) e.y = -e.y;
  }
  auto v = agnostic_learn_stub(s, 0.1, 0.05, Rng(28));
  double stub_err = static_cast<double>(errors_of(s, v)) / 5000.0;
  auto v_erm = erm_homogeneous(s, Rng(29));
  double erm_err = static_cast<double>(errors_of(s, v_erm)) / 5000.0;
  EXPECT_LE(stub_err, 0.15);
  EXPECT_LE(stub_err, erm_err + 0.05);
}

TEST(AgnosticLearnStub, AllSameLabelBeatsClassPrior) {
  auto x = scenarios::sample_marginal(scenarios::gaussian(2), 500, Rng(30));
  LabeledDataset s(2);
  for (const auto& p : x.points) s.add(p, +1);
  auto v = agnostic_learn_stub(s, 0.1, 0.05, Rng(31));
  EXPECT_LE(static_cast<double>(errors_of(s, v)) / 500.0, 0.55);
}

TEST(TdsHomogeneousRealizable, AcceptsMatchingMarginalWithLowTestError) {
  Rng rng(32);
  auto x_tr = scenarios::sample_marginal(scenarios::gaussian(2), 10000, rng.substream(0));
  std::vector<double> v = unit({1.0, -0.8});
  auto s = label_by_direction(x_tr, v);
  auto x_te = scenarios::sample_marginal(scenarios::gaussian(2), 10000, rng.substream(1));
  auto out = tds_homogeneous_realizable(s, x_te, 0.2, rng.substream(2));
  ASSERT_TRUE(out.accepted());
  auto s_te = label_by_direction(x_te, v);
  EXPECT_LE(empirical_error(*out.hypothesis, s_te), 0.2);
}

TEST(TdsHomogeneousRealizable, RejectsBandConcentratedTestSample) {
  Rng rng(33);
  std::vector<double> v = unit({1.0, 0.5});
  auto x_tr = scenarios::sample_marginal(scenarios::gaussian(2), 10000, rng.substream(0));
  auto s = label_by_direction(x_tr, v);
  auto x_te = scenarios::sample_marginal(
      scenarios::band_conditioned(scenarios::gaussian(2), v, 0.01), 3000, rng.substream(1));
  auto out = tds_homogeneous_realizable(s, x_te, 0.2, rng.substream(2));
  EXPECT_FALSE(out.accepted());
  EXPECT_GT(out.diagnostics.at("band_fraction"), 0.15);
}

TEST(TdsHomogeneousRealizable, AcceptsTrainPointsAsTestSet) {
  Rng rng(34);
  auto x = scenarios::sample_marginal(scenarios::gaussian(2), 5000, rng.substream(0));
  auto s = label_by_direction(x, unit({0.3, 1.0}));
  auto out = tds_homogeneous_realizable(s, x, 0.2, rng.substream(1));
  EXPECT_TRUE(out.accepted());
}

TEST(TdsHomogeneousRealizable, AcceptDiagnosticsReplayExactly) {
  Rng rng(35);
  auto x_tr = scenarios::sample_marginal(scenarios::gaussian(2), 4000, rng.substream(0));
  auto s = label_by_direction(x_tr, unit({2.0, 1.0}));
  auto x_te = scenarios::sample_marginal(scenarios::gaussian(2), 4000, rng.substream(1));
  auto once = tds_homogeneous_realizable(s, x_te, 0.2, rng.substream(2));
  auto twice = tds_homogeneous_realizable(s, x_te, 0.2, rng.substream(2));
  ASSERT_TRUE(once.accepted());
  EXPECT_EQ(once.diagnostics, twice.diagnostics);
  EXPECT_LE(once.diagnostics.at("band_fraction"), 0.75 * 0.2);
}

TEST(TdsHomogeneousAgnostic, AcceptsMatchingGaussian) {
  Rng rng(36);
  auto x_tr = scenarios::sample_marginal(scenarios::gaussian(2), 2000, rng.substream(0));
  auto s = label_by_direction(x_tr, unit({1.0, 0.2}));
  auto x_te = scenarios::sample_marginal(scenarios::gaussian(2), 8000, rng.substream(1));
  auto out = tds_homogeneous_agnostic(s, x_te, 0.2, 0.05, Constants{}, rng.substream(2));
  ASSERT_TRUE(out.accepted());
  EXPECT_TRUE(std::get_if<Halfspace>(&out.hypothesis->node) != nullptr);
  bool noted = false;
  for (const auto& note : out.diagnostics.notes) noted |= note.find("stand-in") != std::string::npos;
  EXPECT_TRUE(noted);
}

TEST(TdsHomogeneousAgnostic, PointMassTestSetDeterministic) {
  Rng rng(37);
  auto x_tr = scenarios::sample_marginal(scenarios::gaussian(2), 400, rng.substream(0));
  auto s = label_by_direction(x_tr, unit({1.0, 0.0}));
  auto x_te = scenarios::sample_marginal(scenarios::point_mass({3.0, 3.0}), 500, rng.substream(1));
  auto a = tds_homogeneous_agnostic(s, x_te, 0.2, 0.05, Constants{}, rng.substream(2));
  auto b = tds_homogeneous_agnostic(s, x_te, 0.2, 0.05, Constants{}, rng.substream(2));
  EXPECT_EQ(a.accepted(), b.accepted());
  EXPECT_EQ(a.diagnostics, b.diagnostics);
}

TEST(TdsHomogeneousAgnostic, RequiresMinimumSample) {
  LabeledDataset s(2);
  for (int i = 0; i < 50; ++i) s.add({1.0, 0.0}, +1);
  Dataset x(2);
  x.add({1.0, 1.0});
  EXPECT_THROW(tds_homogeneous_agnostic(s, x, 0.2, 0.05, Constants{}, Rng(0)),
               std::invalid_argument);
}

TEST(TdsGeneralHalfspace, LargeBiasAcceptsConstantOnMatchingMarginal) {
  Rng rng(38);
  std::vector<double> v = unit({1.0, 1.0, 1.0});
  auto x_tr = scenarios::sample_marginal(scenarios::gaussian(3), 20000, rng.substream(0));
  auto s = label_by_direction(x_tr, v, 3.5);
  auto x_te = scenarios::sample_marginal(scenarios::gaussian(3), 50000, rng.substream(1));
  auto out = tds_general_halfspace(s, x_te, 0.1, Constants{}, rng.substream(2));
  EXPECT_EQ(out.diagnostics.branch, "large-bias");
  ASSERT_TRUE(out.accepted());
  const auto* c = std::get_if<ConstantHypothesis>(&out.hypothesis->node);
  ASSERT_NE(c, nullptr);
  EXPECT_EQ(c->label, -1);
}

TEST(TdsGeneralHalfspace, LargeBiasRejectsHeavyTailedTestMarginal) {
  Rng rng(39);
  std::vector<double> v = unit({1.0, 0.0, 0.0});
  auto x_tr = scenarios::sample_marginal(scenarios::gaussian(3), 20000, rng.substream(0));
  auto s = label_by_direction(x_tr, v, 3.5);
  auto x_te = scenarios::sample_marginal(scenarios::student_t_product(3, 3), 20000,
                                         rng.substream(1));
  auto out = tds_general_halfspace(s, x_te, 0.1, Constants{}, rng.substream(2));
  EXPECT_EQ(out.diagnostics.branch, "large-bias");
  EXPECT_FALSE(out.accepted());
  EXPECT_GT(out.diagnostics.at("worst_moment_gap"), out.diagnostics.at("delta"));
}

TEST(TdsGeneralHalfspace, LowBiasRecoversParameters) {
  Rng rng(40);
  std::vector<double> v = unit({0.5, -1.0, 0.8});
  const double tau = 0.2;
  auto x_tr = scenarios::sample_marginal(scenarios::gaussian(3), 100000, rng.substream(0));
  auto s = label_by_direction(x_tr, v, tau);
  auto x_te = scenarios::sample_marginal(scenarios::gaussian(3), 20000, rng.substream(1));
  auto out = tds_general_halfspace(s, x_te, 0.1, Constants{}, rng.substream(2));
  EXPECT_EQ(out.diagnostics.branch, "low-bias");
  ASSERT_TRUE(out.accepted());
  const auto* h = std::get_if<Halfspace>(&out.hypothesis->node);
  ASSERT_NE(h, nullptr);
  std::vector<double> diff{h->v[0] - v[0], h->v[1] - v[1], h->v[2] - v[2]};
  EXPECT_LE(norm2(diff), 0.1);
  EXPECT_NEAR(h->tau, tau, 0.1);
}

TEST(TdsGeneralHalfspace, DegenerateChowRejectsWithDiagnostic) {
  LabeledDataset s(2);
  for (int i = 0; i < 50; ++i) {
    s.add({1.0, 0.0}, +1);
    s.add({1.0, 0.0}, -1);
  }
  Dataset x(2);
  for (int i = 0; i < 10; ++i) x.add({0.5, 0.5});
  auto out = tds_general_halfspace(s, x, 0.1, Constants{}, Rng(41));
  EXPECT_FALSE(out.accepted());
  EXPECT_EQ(out.diagnostics.branch, "low-bias");
  ASSERT_FALSE(out.diagnostics.notes.empty());
  EXPECT_EQ(out.diagnostics.notes[0], "degenerate-chow");
}
