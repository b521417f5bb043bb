#include <gtest/gtest.h>

#include "heirs/numerics/riemannian_cg.hpp"
#include "test_support.hpp"

namespace heirs {
namespace {

RiemannianProblem<FixedRankManifold> distance_problem(const CMatrix& target) {
  RiemannianProblem<FixedRankManifold> p;
  p.cost = [target](const FixedRankPoint& x) { return (x.matrix() - target).squaredNorm(); };
  p.euclidean_gradient = [target](const FixedRankPoint& x) -> CMatrix {
    return 2.0 * (x.matrix() - target);
  };
  return p;
}

TEST(RiemannianCg, FullRankQuadraticReachesKnownMinimizer) {
  std::mt19937_64 rng(41);
  const CMatrix a = testing::random_matrix(4, 3, rng);
  const FixedRankManifold m(4, 3, 3);
  const auto x0 = FixedRankPoint::from_matrix(testing::random_matrix(4, 3, rng), 3);
  CgOptions opt;
  opt.gradient_tolerance = 1e-12;
  const auto result = riemannian_cg(m, distance_problem(a), x0, opt);
  EXPECT_LT(result.cost, 1e-12);
  EXPECT_LT((result.point.matrix() - a).norm(), 1e-6);
}

TEST(RiemannianCg, BestLowRankApproximationMatchesTruncatedSvd) {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 5; ++trial) {
    const CMatrix a = testing::random_matrix(8, 6, rng);
    const Index rank = 2;
    const FixedRankManifold m(8, 6, rank);
    Eigen::BDCSVD<CMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const RVector s = svd.singularValues();
    const CMatrix best = svd.matrixU().leftCols(rank) * s.head(rank).asDiagonal() *
                         svd.matrixV().leftCols(rank).adjoint();
    const double optimum = s.tail(s.size() - rank).squaredNorm();

    const auto x0 = FixedRankPoint::from_matrix(testing::random_matrix(8, 6, rng), rank);
    CgOptions opt;
    opt.gradient_tolerance = 1e-11;
    opt.cost_tolerance = 0.0;
    opt.max_iterations = 2000;
    const auto result = riemannian_cg(m, distance_problem(a), x0, opt);
    EXPECT_NEAR(result.cost, optimum, 1e-8 * optimum);
    EXPECT_LT((result.point.matrix() - best).norm(), 1e-6 * best.norm());
  }
}

TEST(RiemannianCg, CostTraceIsMonotone) {
  std::mt19937_64 rng(43);
  const CMatrix a = testing::random_matrix(6, 6, rng);
  const FixedRankManifold m(6, 6, 3);
  const auto x0 = FixedRankPoint::from_matrix(testing::random_matrix(6, 6, rng), 3);
  const auto result = riemannian_cg(m, distance_problem(a), x0);
  ASSERT_GE(result.trace.cost.size(), 2u);
  for (std::size_t i = 1; i < result.trace.cost.size(); ++i) {
    EXPECT_LE(result.trace.cost[i], result.trace.cost[i - 1]);
  }
  EXPECT_LE(result.cost, result.trace.cost.front());
}

TEST(RiemannianCg, SearchDirectionStaysTangent) {
  std::mt19937_64 rng(44);
  const CMatrix a = testing::random_matrix(7, 5, rng);
  const FixedRankManifold m(7, 5, 2);
  const auto x0 = FixedRankPoint::from_matrix(testing::random_matrix(7, 5, rng), 2);
  int observed = 0;
  riemannian_cg(m, distance_problem(a), x0, CgOptions{}, [&](const CgState<FixedRankManifold>& s) {
    const CMatrix residual = s.direction - m.project(s.point, s.direction);
    EXPECT_LT(residual.norm(), 1e-8 * std::max(1.0, s.direction.norm()));
    ++observed;
  });
  EXPECT_GT(observed, 0);
}

TEST(RiemannianCg, CircleQuadraticFormBeatsRandomPoints) {
  std::mt19937_64 rng(45);
  const CMatrix b = testing::random_matrix(5, 5, rng);
  const CMatrix h = b * b.adjoint();
  const CircleManifold m(5);
  RiemannianProblem<CircleManifold> p;
  p.cost = [&](const CirclePoint& w) { return -(w.phases().adjoint() * h * w.phases())(0).real(); };
  p.euclidean_gradient = [&](const CirclePoint& w) -> CVector { return -2.0 * h * w.phases(); };
  const auto result = riemannian_cg(m, p, CirclePoint(testing::random_unit_modulus(5, rng)));
  for (int i = 0; i < 2000; ++i) {
    const CirclePoint w(testing::random_unit_modulus(5, rng));
    EXPECT_LE(result.cost, p.cost(w) + 1e-9);
  }
}

TEST(RiemannianCg, NonFiniteCostIsReported) {
  const FixedRankManifold m(3, 3, 1);
  RiemannianProblem<FixedRankManifold> p;
  p.cost = [](const FixedRankPoint&) { return std::numeric_limits<double>::quiet_NaN(); };
  p.euclidean_gradient = [](const FixedRankPoint&) -> CMatrix { return CMatrix::Zero(3, 3); };
  const auto result = riemannian_cg(m, p, FixedRankPoint::from_matrix(CMatrix::Identity(3, 3), 1));
  EXPECT_EQ(result.trace.stop, CgStop::kNonFinite);
  EXPECT_FALSE(result.trace.diagnostic.empty());
}

TEST(RiemannianCg, ZeroIterationsReturnsStart) {
  const FixedRankManifold m(3, 3, 1);
  const auto x0 = FixedRankPoint::from_matrix(CMatrix::Identity(3, 3), 1);
  CgOptions opt;
  opt.max_iterations = 0;
  const auto result = riemannian_cg(m, distance_problem(CMatrix::Ones(3, 3)), x0, opt);
  EXPECT_EQ(result.point.matrix(), x0.matrix());
}

}  // namespace
}  // namespace heirs
