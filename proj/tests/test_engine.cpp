#include "pokm/engine.hpp"
#include "pokm/oracle.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>

using namespace pokm;
using pokm::testing::points_1d;
using pokm::testing::random_dataset;
using pokm::testing::random_matrix;

namespace {

const double kLog2_5 = std::log2(5.0);

MatrixXd means_1d(std::initializer_list<double> values) {
  MatrixXd m(static_cast<Index>(values.size()), 1);
  Index i = 0;
  for (double v : values) m(i++, 0) = v;
  return m;
}

VectorXd point(double v) { return VectorXd::Constant(1, v); }

}  // namespace

TEST(AssignElement, PointOnAMeanIsExclusive) {
  MatrixXd means(2, 2);
  means << 1, 2, -3, 4;
  for (double m : {1.0, 2.0, 6.0}) {
    const auto a = assign_element(VectorXd(means.row(1).transpose()), means, m);
    EXPECT_EQ(a, Assignment::single(1));
  }
}

TEST(AssignElement, OneDimensionalOverlapLevelThird) {
  const auto means = means_1d({0.0, 1.0});
  // 0.04 < (0.04 + 0.64) / 5
  EXPECT_EQ(assign_element(point(0.2), means, kLog2_5), Assignment::single(0));
  // 0.25 >= 0.5 / 5
  EXPECT_EQ(assign_element(point(0.5), means, kLog2_5), Assignment::dual(0, 1));
  EXPECT_EQ(assign_element(point(0.8), means, kLog2_5), Assignment::single(1));
  EXPECT_EQ(assign_element(point(0.6), means, kLog2_5), Assignment::dual(1, 0));
}

TEST(AssignElement, ExactTieAtMOneIsShared) {
  // The rule is d1 < (d1 + d2) / 2^m for an exclusive member; equality shares.
  EXPECT_EQ(assign_element(point(0.5), means_1d({0.0, 1.0}), 1.0), Assignment::dual(0, 1));
}

TEST(AssignElement, SingleClusterAlwaysExclusive) {
  EXPECT_EQ(assign_element(point(42.0), means_1d({0.0}), 8.0), Assignment::single(0));
}

TEST(AssignElement, TiesPickLowestIndices) {
  // Three equidistant means; the two lowest indices are chosen.
  EXPECT_EQ(assign_element(point(0.0), means_1d({1.0, -1.0, 1.0}), 1.0), Assignment::dual(0, 1));
}

TEST(AssignElement, RejectsBadShapes) {
  EXPECT_THROW(assign_element(point(0.0), MatrixXd(0, 1), 2.0), std::invalid_argument);
  EXPECT_THROW(assign_element(VectorXd::Zero(2), means_1d({0.0, 1.0}), 2.0), std::invalid_argument);
}

TEST(AssignElementProperty, NeverLeavesTheTwoNearestMeans) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> kd(3, 6), nd(1, 4);
  std::uniform_real_distribution<double> md(1.0, 5.0);
  for (int t = 0; t < 2000; ++t) {
    const Index k = kd(rng), n = nd(rng);
    const MatrixXd means = random_matrix(rng, k, n);
    const VectorXd x = random_matrix(rng, n, 1);
    const auto a = assign_element(x, means, md(rng));
    VectorXd d(k);
    for (Index i = 0; i < k; ++i) d(i) = (means.row(i).transpose() - x).squaredNorm();
    std::vector<Index> order(static_cast<std::size_t>(k));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index l, Index r) { return d(l) < d(r); });
    EXPECT_EQ(a.primary, order[0]);
    if (a.secondary) EXPECT_EQ(*a.secondary, order[1]);
    if (a.secondary) EXPECT_LE(d(a.primary), d(*a.secondary));
  }
}

TEST(UpdateMeans, ExclusiveMembersAverage) {
  const auto data = points_1d({0.0, 2.0});
  const Assignments h{Assignment::single(0), Assignment::single(0)};
  for (double m : {1.0, 3.0}) EXPECT_DOUBLE_EQ(update_means(data, h, 1, m)(0, 0), 1.0);
}

TEST(UpdateMeans, SharedMemberHasDiscountedWeight) {
  // Cluster 0 holds 0.0 exclusively and 1.0 shared with cluster 1:
  // (0 * 1 + 1 * 0.5) / (1 + 0.5) at m = 1.
  const auto data = points_1d({0.0, 1.0, 3.0});
  const Assignments h{Assignment::single(0), Assignment::dual(0, 1), Assignment::single(1)};
  const auto means = update_means(data, h, 2, 1.0);
  EXPECT_NEAR(means(0, 0), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(means(1, 0), (0.5 * 1.0 + 3.0) / 1.5, 1e-15);
}

TEST(UpdateMeans, HardAssignmentsGiveArithmeticMeans) {
  std::mt19937_64 rng(3);
  const auto data = random_dataset(rng, 60, 3);
  Assignments h;
  for (Index j = 0; j < data.size(); ++j) h.push_back(Assignment::single(j % 4));
  const auto means = update_means(data, h, 4, 1.0);
  for (Index i = 0; i < 4; ++i) {
    Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(3);
    int count = 0;
    for (Index j = i; j < data.size(); j += 4) sum += data.row(j), ++count;
    EXPECT_TRUE(means.row(i).isApprox(sum / count, 1e-14));
  }
}

TEST(UpdateMeans, EmptyClusterIsReseededAtWorstElement) {
  const auto data = points_1d({0.0, 1.0, 10.0});
  const Assignments h{Assignment::single(0), Assignment::single(0), Assignment::single(0)};
  const auto means = update_means(data, h, 3, 2.0);
  EXPECT_DOUBLE_EQ(means(0, 0), 11.0 / 3.0);
  // 10 is farthest from the new mean 11/3, then 0 (distance 11/3 vs 8/3 for 1).
  EXPECT_DOUBLE_EQ(means(1, 0), 10.0);
  EXPECT_DOUBLE_EQ(means(2, 0), 0.0);
}

TEST(UpdateMeans, RejectsInvalidAssignments) {
  const auto data = points_1d({0.0, 1.0});
  EXPECT_THROW(update_means(data, {Assignment::single(0)}, 1, 1.0), std::invalid_argument);
  EXPECT_THROW(update_means(data, {Assignment::single(0), Assignment::single(2)}, 2, 1.0), std::invalid_argument);
}

TEST(UpdateMeansProperty, FirstOrderStationary) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> kd(1, 6), nd(1, 5);
  const double eps = 1e-4;
  for (int t = 0; t < 100; ++t) {
    const Index k = kd(rng), n = nd(rng);
    const auto data = random_dataset(rng, 40, n);
    std::uniform_int_distribution<Index> cl(0, k - 1);
    std::bernoulli_distribution shared(0.3);
    Assignments h;
    for (Index j = 0; j < data.size(); ++j) {
      // Cover every cluster so no re-seeding happens.
      const Index a = j < k ? j : cl(rng);
      Index b = cl(rng);
      h.push_back(k > 1 && shared(rng) && b != a ? Assignment::dual(a, b) : Assignment::single(a));
    }
    for (double m : {1.0, kLog2_5, 3.0}) {
      const auto means = update_means(data, h, k, m);
      const double j0 = objective(data, h, means, m);
      for (Index i = 0; i < k; ++i)
        for (Index c = 0; c < n; ++c)
          for (double s : {-eps, eps}) {
            MatrixXd moved = means;
            moved(i, c) += s;
            EXPECT_GE(objective(data, h, moved, m), j0 - 1e-10);
          }
    }
  }
}

TEST(Objective, ZeroWhenPointsSitOnTheirMeans) {
  const auto data = points_1d({1.0, 5.0, 5.0});
  EXPECT_EQ(objective(data, {Assignment::single(0), Assignment::single(1), Assignment::single(1)},
                      means_1d({1.0, 5.0}), 2.0),
            0.0);
}

TEST(Objective, SharedElementTerm) {
  const auto data = points_1d({0.5});
  EXPECT_DOUBLE_EQ(objective(data, {Assignment::dual(0, 1)}, means_1d({0.0, 1.0}), 1.0), 0.25);
  EXPECT_DOUBLE_EQ(objective(data, {Assignment::dual(0, 1)}, means_1d({0.0, 1.0}), 2.0), 0.125);
}

TEST(Objective, RejectsShapeMismatch) {
  const auto data = points_1d({0.5, 1.0});
  EXPECT_THROW(objective(data, {Assignment::single(0)}, means_1d({0.0}), 1.0), std::invalid_argument);
  EXPECT_THROW(objective(data, {Assignment::single(0), Assignment::single(0)}, MatrixXd(MatrixXd::Zero(1, 2)), 1.0),
               std::invalid_argument);
}

TEST(InitializeMeans, GreedySpreadPicksFarthest) {
  const auto data = points_1d({0.0, 0.1, 10.0});
  const auto means = greedy_spread_means(data, 2, 0);
  EXPECT_EQ(means(0, 0), 0.0);
  EXPECT_EQ(means(1, 0), 10.0);
}

TEST(InitializeMeans, KEqualsNUsesEveryPoint) {
  const auto data = points_1d({3.0, -1.0, 7.0, 2.5});
  for (auto method : {InitMethod::RandomPoints, InitMethod::GreedySpread}) {
    const auto means = initialize_means(data, 4, method, 9);
    std::multiset<double> got(means.data(), means.data() + means.size());
    EXPECT_EQ(got, (std::multiset<double>{3.0, -1.0, 7.0, 2.5}));
  }
}

TEST(InitializeMeans, DeterministicAndDistinctRows) {
  std::mt19937_64 rng(8);
  const auto data = random_dataset(rng, 50, 2);
  for (auto method : {InitMethod::RandomPoints, InitMethod::GreedySpread}) {
    const auto a = initialize_means(data, 6, method, 123);
    EXPECT_EQ(a, initialize_means(data, 6, method, 123));
    for (Index i = 0; i < 6; ++i)
      for (Index j = i + 1; j < 6; ++j) EXPECT_NE(a.row(i), a.row(j));
  }
  EXPECT_NE(initialize_means(data, 6, InitMethod::RandomPoints, 1),
            initialize_means(data, 6, InitMethod::RandomPoints, 2));
}

TEST(InitializeMeans, RejectsKAboveN) {
  const auto data = points_1d({0.0, 1.0});
  EXPECT_THROW(initialize_means(data, 3, InitMethod::RandomPoints, 0), std::invalid_argument);
  EXPECT_THROW(initialize_means(data, 0, InitMethod::GreedySpread, 0), std::invalid_argument);
}

TEST(Fit, DistinctPointsOnePerCluster) {
  const auto data = points_1d({-4.0, 0.0, 3.0, 9.0});
  FitConfig config;
  config.k = 4;
  for (double m : {1.0, kLog2_5, 4.0}) {
    config.m = m;
    const auto model = fit(data, config);
    EXPECT_EQ(model.objective, 0.0);
    EXPECT_TRUE(model.converged);
    EXPECT_LE(model.iterations, 2);
    std::set<Index> used;
    for (const auto& a : model.assignments) {
      EXPECT_FALSE(a.is_dual());
      used.insert(a.primary);
    }
    EXPECT_EQ(used.size(), 4u);
  }
}

TEST(Fit, IdenticalPointsGiveEqualMeans) {
  MatrixXd x = MatrixXd::Constant(10, 2, 1.5);
  const Dataset<double> data(x);
  FitConfig config;
  config.k = 3;
  const auto model = fit(data, config);
  EXPECT_TRUE(model.converged);
  for (Index i = 0; i < 3; ++i) EXPECT_EQ(model.means.row(i), x.row(0));
  EXPECT_EQ(model.objective, 0.0);
}

TEST(Fit, RejectsKAboveN) {
  FitConfig config;
  config.k = 3;
  EXPECT_THROW(fit(points_1d({0.0, 1.0}), config), std::invalid_argument);
}

TEST(Fit, SingleClusterIsTheMean) {
  const auto data = points_1d({1.0, 2.0, 6.0});
  FitConfig config;
  config.k = 1;
  const auto model = fit(data, config);
  EXPECT_DOUBLE_EQ(model.means(0, 0), 3.0);
  for (const auto& a : model.assignments) EXPECT_EQ(a, Assignment::single(0));
}

TEST(FitProperty, DescentTerminationAndInvariants) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> nd(1, 5), kd(1, 6), sz(6, 200);
  const double ms[] = {1.0, 2.0, kLog2_5, 3.0};
  for (int t = 0; t < 60; ++t) {
    const auto data = random_dataset(rng, sz(rng), nd(rng));
    FitConfig config;
    config.k = kd(rng);
    config.m = ms[t % 4];
    config.seed = rng();
    config.init = t % 2 ? InitMethod::GreedySpread : InitMethod::RandomPoints;
    FitTrace<double> trace;
    const auto model = fit(data, config, &trace);
    EXPECT_TRUE(model.converged) << "run " << t;
    for (std::size_t s = 1; s < trace.objectives.size(); ++s)
      EXPECT_LE(trace.objectives[s], trace.objectives[s - 1] + 1e-9) << "run " << t << " half-step " << s;
    EXPECT_NEAR(model.objective, objective(data, model.assignments, model.means, config.m),
                1e-9 * std::max(1.0, model.objective));
    for (const auto& a : model.assignments) {
      EXPECT_GE(a.size(), 1);
      EXPECT_LE(a.size(), 2);
      EXPECT_LT(a.primary, config.k);
      if (a.secondary) EXPECT_LT(*a.secondary, config.k);
    }
    // A converged model is a fixed point of one more Assignment step.
    EXPECT_EQ(assign_all(data, model.means, config.m), model.assignments);
  }
}

TEST(FitProperty, DeterministicGivenSeed) {
  std::mt19937_64 rng(1);
  const auto data = random_dataset(rng, 120, 3);
  FitConfig config;
  config.k = 5;
  config.seed = 77;
  const auto a = fit(data, config);
  const auto b = fit(data, config);
  EXPECT_EQ(a.means, b.means);
  EXPECT_EQ(a.assignments, b.assignments);
  EXPECT_EQ(a.objective, b.objective);
}

TEST(RestartSeed, FirstRestartUsesBaseSeed) {
  EXPECT_EQ(restart_seed(42, 0), 42u);
  EXPECT_NE(restart_seed(42, 1), restart_seed(42, 2));
  EXPECT_NE(restart_seed(42, 1), restart_seed(43, 1));
  // splitmix64 reference output for state 0 after one step.
  EXPECT_EQ(splitmix64(0), 0xE220A8397B1DCDAFULL);
}

TEST(FitMultiRestart, OneRestartEqualsFit) {
  std::mt19937_64 rng(9);
  const auto data = random_dataset(rng, 80, 2);
  FitConfig config;
  config.k = 4;
  config.seed = 5;
  config.restarts = 1;
  const auto single = fit(data, config);
  const auto multi = fit_multi_restart(data, config);
  EXPECT_EQ(single.means, multi.means);
  EXPECT_EQ(single.assignments, multi.assignments);
}

TEST(FitMultiRestart, PicksMinimumAndIgnoresThreadCount) {
  std::mt19937_64 rng(10);
  const auto data = random_dataset(rng, 150, 2);
  FitConfig config;
  config.k = 6;
  config.seed = 99;
  config.restarts = 12;

  std::vector<double> independent;
  for (int r = 0; r < config.restarts; ++r) {
    FitConfig c = config;
    c.seed = restart_seed(config.seed, r);
    independent.push_back(fit(data, c).objective);
  }
  config.threads = 1;
  const auto serial = fit_restarts(data, config);
  config.threads = 4;
  const auto parallel = fit_restarts(data, config);

  EXPECT_EQ(serial.objectives, independent);
  EXPECT_EQ(parallel.objectives, independent);
  EXPECT_EQ(serial.best.objective, *std::min_element(independent.begin(), independent.end()));
  const auto first_min = std::min_element(independent.begin(), independent.end()) - independent.begin();
  EXPECT_EQ(serial.best_restart, first_min);
  EXPECT_EQ(parallel.best_restart, first_min);
  EXPECT_EQ(serial.best.means, parallel.best.means);
  EXPECT_EQ(serial.best.assignments, parallel.best.assignments);
}

TEST(FitScalar, WorksInSinglePrecision) {
  Matrix<float> x(6, 1);
  x << 0.f, 0.2f, 0.4f, 5.f, 5.2f, 5.4f;
  const Dataset<float> data(x);
  FitConfig config;
  config.k = 2;
  config.init = InitMethod::GreedySpread;
  const auto model = fit(data, config);
  EXPECT_TRUE(model.converged);
  EXPECT_NEAR(std::min(model.means(0, 0), model.means(1, 0)), 0.2f, 1e-5f);
}
