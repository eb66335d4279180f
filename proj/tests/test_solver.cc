#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "doctest.h"
#include "oracles.h"
#include "test_util.h"
#include "transolve/error.h"
#include "transolve/simulator.h"
#include "transolve/solver.h"

using namespace transolve;
using transolve::testing::CircleOracle;
using transolve::testing::RandomSparse;
using transolve::testing::ShrinkOracle;
using transolve::testing::SignFreeDistance;

namespace {

SparseMatrix FromDense(const Eigen::MatrixXd& d) {
  return d.sparseView();
}

// Noise-free assembled system of a small orbit scene and its true solution.
struct SceneSystem {
  SparseMatrix a;
  Eigen::VectorXd x_true;
};

SceneSystem OrbitSystem(std::uint64_t seed, int cameras = 10) {
  SceneConfig cfg;
  cfg.num_cameras = cameras;
  cfg.num_points = 300;
  cfg.seed = seed;
  const SimulatedScene s = GenerateScene(cfg);
  std::vector<Rotation> rotations;
  std::vector<Vec3> centers;
  Vec3 mean = Vec3::Zero();
  for (const CameraPose& c : s.truth.cameras) {
    rotations.push_back(c.rotation);
    centers.push_back(c.center);
    mean += c.center;
  }
  mean /= cameras;
  for (Vec3& c : centers) c -= mean;
  const TrackSelection sel = SelectTracks(s.dataset.tracks, 10);
  AssemblyParams params;
  params.seed = seed;
  const AssembledSystem sys =
      AssembleSystem(s.dataset.graph, rotations, s.dataset.tracks, sel, params);
  return {sys.system.matrix, StackCenters(centers).normalized()};
}

}  // namespace

TEST_SUITE("solver") {

TEST_CASE("spectral norm examples") {
  CHECK(SpectralNormSq(FromDense(Eigen::MatrixXd::Identity(3, 3))) ==
        doctest::Approx(1.0).epsilon(1e-9));
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2, 2);
  d(0, 0) = 3.0;
  d(1, 1) = 1.0;
  CHECK(SpectralNormSq(FromDense(d)) == doctest::Approx(9.0).epsilon(1e-9));
}

TEST_CASE("spectral norm matches a dense SVD") {
  Rng rng(40);
  for (int trial = 0; trial < 10; ++trial) {
    const SparseMatrix a = RandomSparse(rng, 50, 30, 0.1);
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd{Eigen::MatrixXd(a)};
    const double oracle = svd.singularValues()(0) * svd.singularValues()(0);
    CHECK(std::abs(SpectralNormSq(a, 1e-10, trial) - oracle) <= 1e-3 * oracle);
  }
}

TEST_CASE("shrink examples") {
  CHECK(Shrink(2.0, 0.5) == 1.5);
  CHECK(Shrink(-0.3, 0.5) == 0.0);
  CHECK(Shrink(-2.0, 0.5) == -1.5);
  Eigen::VectorXd u(3);
  u << 2.0, -0.3, -1.0;
  const Eigen::VectorXd e = Shrink(u, 0.5);
  CHECK(e(0) == 1.5);
  CHECK(e(1) == 0.0);
  CHECK(e(2) == -0.5);
}

TEST_CASE("shrink matches the grid oracle") {
  Rng rng(41);
  for (int k = 0; k < 1000; ++k) {
    const double u = rng.Uniform(-2.0, 2.0);
    const double eps = rng.Uniform(0.0, 1.0);
    CHECK(std::abs(Shrink(u, eps) - ShrinkOracle(u, eps)) < 1e-6);
  }
}

TEST_CASE("shrink is nonexpansive") {
  Rng rng(42);
  for (int k = 0; k < 200; ++k) {
    Eigen::VectorXd u(20), v(20);
    for (int i = 0; i < 20; ++i) u(i) = 3.0 * rng.Normal(), v(i) = 3.0 * rng.Normal();
    const double eps = rng.Uniform(0.0, 2.0);
    CHECK((Shrink(u, eps) - Shrink(v, eps)).norm() <= (u - v).norm() + 1e-15);
  }
}

TEST_CASE("update_x fixed point and projection") {
  Rng rng(43);
  const SparseMatrix a = RandomSparse(rng, 30, 12, 0.3);
  const double eta = 1.05 * SpectralNormSq(a);
  AdmmState s;
  s.x = Eigen::VectorXd::NullaryExpr(12, [&] { return rng.Normal(); }).normalized();
  s.e = a * s.x;
  s.lambda = Eigen::VectorXd::Zero(30);
  s.beta = 1.0;
  Eigen::VectorXd x_next;
  REQUIRE(UpdateX(s, a, eta, &x_next));
  CHECK((x_next - s.x).norm() < 1e-12);

  for (int k = 0; k < 100; ++k) {
    s.e = Eigen::VectorXd::NullaryExpr(30, [&] { return rng.Normal(); });
    s.lambda = Eigen::VectorXd::NullaryExpr(30, [&] { return rng.Normal(); });
    s.beta = std::exp(rng.Uniform(-5.0, 5.0));
    REQUIRE(UpdateX(s, a, eta, &x_next));
    CHECK(std::abs(x_next.norm() - 1.0) < 1e-12);
  }
}

TEST_CASE("update_x matches the 2-variable grid oracle") {
  // Linearized objective over the unit circle:
  //   <g, x - x_k> + eta/2 |x - x_k|^2,
  //   g = A^T (A x_k - e) + A^T lambda / beta.
  Rng rng(44);
  for (int trial = 0; trial < 100; ++trial) {
    const int m = 3 + static_cast<int>(rng.Below(6));
    Eigen::MatrixXd d(m, 2);
    for (int r = 0; r < m; ++r) d(r, 0) = rng.Normal(), d(r, 1) = rng.Normal();
    const SparseMatrix a = FromDense(d);
    const double eta = 1.05 * SpectralNormSq(a);
    AdmmState s;
    const double phi = rng.Uniform(0.0, 2.0 * std::numbers::pi);
    s.x = Eigen::Vector2d(std::cos(phi), std::sin(phi));
    s.e = Eigen::VectorXd::NullaryExpr(m, [&] { return rng.Normal(); });
    s.lambda = Eigen::VectorXd::NullaryExpr(m, [&] { return rng.Normal(); });
    s.beta = std::exp(rng.Uniform(-2.0, 2.0));
    Eigen::VectorXd x_next;
    REQUIRE(UpdateX(s, a, eta, &x_next));

    const Eigen::Vector2d best =
        CircleOracle(d, s.x, s.e, s.lambda, s.beta, eta);
    CHECK((x_next - best).norm() < 1e-4);
  }
}

TEST_CASE("one iteration at a fixed point changes nothing") {
  const SceneSystem sys = OrbitSystem(45);
  const double eta = 1.05 * SpectralNormSq(sys.a);
  AdmmState s;
  s.x = sys.x_true;
  s.e = sys.a * s.x;
  s.lambda = Eigen::VectorXd::Zero(sys.a.rows());
  s.beta = 1e-6;
  s.e = UpdateE(s, sys.a);
  Eigen::VectorXd x_next;
  REQUIRE(UpdateX(s, sys.a, eta, &x_next));
  CHECK((x_next - sys.x_true).norm() < 1e-10);
  CHECK((s.e - sys.a * sys.x_true).norm() < 1e-10);
}

TEST_CASE("params validation") {
  AdmmParams p;
  CHECK_NOTHROW(p.Validate());
  p.rho = 1.0;
  CHECK_THROWS_AS(p.Validate(), Error);
  p = AdmmParams{};
  p.beta0 = 0.0;
  CHECK_THROWS_AS(p.Validate(), Error);
  p = AdmmParams{};
  p.eta_safety = 1.0;
  CHECK_THROWS_AS(p.Validate(), Error);
  p = AdmmParams{};
  p.beta_max = 1e-9;
  CHECK_THROWS_AS(p.Validate(), Error);
}

TEST_CASE("smallest singular vector examples") {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2, 2);
  d(0, 0) = 1.0;
  const SingularVectorResult r = SmallestSingularVector(FromDense(d));
  CHECK(r.converged);
  CHECK(std::abs(r.x(0)) < 1e-12);
  CHECK(std::abs(std::abs(r.x(1)) - 1.0) < 1e-12);

  const SceneSystem sys = OrbitSystem(46);
  const SingularVectorResult s = SmallestSingularVector(sys.a);
  CHECK((sys.a * s.x).norm() < 1e-9);
  CHECK(SignFreeDistance(s.x, sys.x_true) < 1e-8);
}

TEST_CASE("smallest singular vector matches a dense SVD") {
  Rng rng(47);
  for (int trial = 0; trial < 10; ++trial) {
    const SparseMatrix a = RandomSparse(rng, 40, 20, 0.3);
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(Eigen::MatrixXd(a),
                                                Eigen::ComputeFullV);
    const SingularVectorResult r = SmallestSingularVector(a, 1e-12, trial);
    CHECK(r.converged);
    CHECK(std::abs(r.singular_value - svd.singularValues()(19)) < 1e-8);
    CHECK(std::abs((a * r.x).norm() - svd.singularValues()(19)) < 1e-8);
    CHECK(SignFreeDistance(r.x, svd.matrixV().col(19)) < 1e-8);
  }
}

TEST_CASE("admm agrees with L2 on outlier-free systems") {
  for (std::uint64_t seed : {48, 49}) {
    const SceneSystem sys = OrbitSystem(seed);
    AdmmParams p;
    p.seed = seed;
    const AdmmResult r = AdmmSolve(sys.a, p);
    CHECK(r.converged);
    CHECK(SignFreeDistance(r.x, r.x_initial) < 1e-6);
    CHECK(SignFreeDistance(r.x, sys.x_true) < 1e-6);
  }
}

TEST_CASE("admm mechanics on a system with outlier rows") {
  // 20% of the constraint rows receive gross errors.
  const SceneSystem sys = OrbitSystem(50);
  Rng rng(50);
  Eigen::MatrixXd d(sys.a);
  const int m = static_cast<int>(d.rows());
  for (int r = 0; r < m - 3; ++r) {
    if (rng.Uniform() < 0.2) {
      for (int c = 0; c < d.cols(); ++c) {
        if (d(r, c) != 0.0) d(r, c) += rng.Normal();
      }
    }
  }
  const SparseMatrix a = FromDense(d);
  AdmmParams p;
  p.seed = 50;
  const AdmmResult r = AdmmSolve(a, p);
  CHECK((a * r.x).lpNorm<1>() <= (a * r.x_initial).lpNorm<1>());
  CHECK(SignFreeDistance(r.x, sys.x_true) < SignFreeDistance(r.x_initial, sys.x_true));

  REQUIRE(r.trace.size() == static_cast<std::size_t>(r.iterations));
  CHECK(r.trace.front().beta == p.beta0);
  for (std::size_t k = 0; k < r.trace.size(); ++k) {
    CHECK(std::abs(r.trace[k].x_norm - 1.0) <= 1e-10);
    if (k + 1 < r.trace.size()) {
      const double b = r.trace[k].beta;
      CHECK(r.trace[k + 1].beta == std::min(p.beta_max, p.rho * b));
      CHECK(r.trace[k + 1].beta >= b);
      CHECK(r.trace[k + 1].beta <= p.beta_max);
    }
  }
  if (r.converged) {
    CHECK(r.trace.back().primal_residual < p.tol_primal * std::sqrt(m));
  }
}

TEST_CASE("admm returns the best iterate when not converged") {
  const SceneSystem sys = OrbitSystem(51);
  Eigen::MatrixXd d(sys.a);
  Rng rng(51);
  for (int r = 0; r < d.rows() - 3; r += 4) d(r, r % d.cols()) += rng.Normal();
  const SparseMatrix a = FromDense(d);
  AdmmParams p;
  p.max_iter = 5;
  const AdmmResult r = AdmmSolve(a, p);
  CHECK_FALSE(r.converged);
  CHECK(r.iterations == 5);
  double best = (a * r.x_initial).lpNorm<1>();
  for (const AdmmTraceEntry& t : r.trace) best = std::min(best, t.l1_objective);
  CHECK((a * r.x).lpNorm<1>() == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("admm is deterministic for a seed") {
  const SceneSystem sys = OrbitSystem(52);
  Eigen::MatrixXd d(sys.a);
  for (int r = 0; r < d.rows() - 3; r += 5) d(r, 0) += 0.5;
  const SparseMatrix a = FromDense(d);
  AdmmParams p;
  p.seed = 9;
  p.max_iter = 300;
  const AdmmResult r1 = AdmmSolve(a, p);
  const AdmmResult r2 = AdmmSolve(a, p);
  CHECK(r1.x == r2.x);
  CHECK(r1.iterations == r2.iterations);
}

}  // TEST_SUITE
