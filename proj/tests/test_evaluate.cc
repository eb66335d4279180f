#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "test_util.h"
#include "transolve/error.h"
#include "transolve/evaluate.h"

using namespace transolve;
using transolve::testing::RandomRotation;

namespace {

std::vector<Vec3> RandomPoints(Rng& rng, int n) {
  std::vector<Vec3> p;
  for (int k = 0; k < n; ++k) p.push_back(Vec3(rng.Normal(), rng.Normal(), rng.Normal()));
  return p;
}

std::vector<Vec3> Apply(double s, const Rotation& r, const Vec3& t,
                        const std::vector<Vec3>& p) {
  std::vector<Vec3> out;
  for (const Vec3& x : p) out.push_back(s * (r * x) + t);
  return out;
}

double Objective(double s, const Rotation& r, const Vec3& t,
                 const std::vector<Vec3>& est, const std::vector<Vec3>& gt) {
  double f = 0.0;
  for (std::size_t k = 0; k < est.size(); ++k) {
    f += (s * (r * est[k]) + t - gt[k]).squaredNorm();
  }
  return f;
}

}  // namespace

TEST_SUITE("evaluate") {

TEST_CASE("identity alignment") {
  Rng rng(60);
  const std::vector<Vec3> gt = RandomPoints(rng, 10);
  const AlignmentResult r = SimilarityAlign(gt, gt);
  CHECK(r.scale == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.rotation.Angle() < 1e-9);
  CHECK(r.translation.norm() < 1e-12);
  CHECK(r.max_error < 1e-12);
  CHECK_FALSE(r.degenerate);
}

TEST_CASE("exact similarity is removed") {
  Rng rng(61);
  const std::vector<Vec3> gt = RandomPoints(rng, 10);
  std::vector<Vec3> est;
  for (const Vec3& g : gt) est.push_back(2.0 * g + Vec3(1, 1, 1));
  const AlignmentResult r = SimilarityAlign(est, gt);
  CHECK(r.scale == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(r.rotation.Angle() < 1e-9);
  CHECK((r.translation + Vec3(0.5, 0.5, 0.5)).norm() < 1e-12);
  CHECK(r.max_error < 1e-12);
}

TEST_CASE("alignment beats random similarities") {
  Rng rng(62);
  for (int trial = 0; trial < 20; ++trial) {
    const std::vector<Vec3> est = RandomPoints(rng, 8);
    const std::vector<Vec3> gt = RandomPoints(rng, 8);
    const AlignmentResult r = SimilarityAlign(est, gt);
    const double best = Objective(r.scale, r.rotation, r.translation, est, gt);
    double sum_sq = 0.0;
    for (double e : r.per_camera_error) sum_sq += e * e;
    CHECK(sum_sq == doctest::Approx(best).epsilon(1e-9));
    for (int k = 0; k < 1000; ++k) {
      const double s = std::exp(rng.Uniform(-2.0, 2.0));
      const Vec3 t(rng.Normal(), rng.Normal(), rng.Normal());
      CHECK(best <= Objective(s, RandomRotation(rng), t, est, gt) + 1e-12);
    }
  }
}

TEST_CASE("alignment is idempotent and invariant to a pre-applied similarity") {
  Rng rng(63);
  for (int trial = 0; trial < 50; ++trial) {
    const std::vector<Vec3> gt = RandomPoints(rng, 12);
    std::vector<Vec3> est = gt;
    for (Vec3& e : est) e += 0.1 * Vec3(rng.Normal(), rng.Normal(), rng.Normal());
    const AlignmentResult r = SimilarityAlign(est, gt);
    const std::vector<Vec3> aligned = Apply(r.scale, r.rotation, r.translation, est);
    const AlignmentResult again = SimilarityAlign(aligned, gt);
    for (std::size_t k = 0; k < gt.size(); ++k) {
      CHECK(std::abs(again.per_camera_error[k] - r.per_camera_error[k]) < 1e-12);
    }
    const std::vector<Vec3> moved =
        Apply(std::exp(rng.Uniform(-1.0, 1.0)), RandomRotation(rng),
              Vec3(rng.Normal(), rng.Normal(), rng.Normal()), est);
    const AlignmentResult other = SimilarityAlign(moved, gt);
    for (std::size_t k = 0; k < gt.size(); ++k) {
      CHECK(std::abs(other.per_camera_error[k] - r.per_camera_error[k]) < 1e-9);
    }
  }
}

TEST_CASE("collinear points use the minimal-angle rotation") {
  std::vector<Vec3> gt, est;
  const Rotation tilt = Rotation::FromAngleAxis(0.3, Vec3(0, 0, 1));
  for (int k = 0; k < 6; ++k) {
    gt.push_back(Vec3(k, 0, 0));
    est.push_back(3.0 * (tilt * Vec3(k, 0, 0)) + Vec3(1, 2, 3));
  }
  const AlignmentResult r = SimilarityAlign(est, gt);
  CHECK(r.degenerate);
  CHECK(r.max_error < 1e-9);
  CHECK(r.scale == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
  CHECK(r.rotation.Angle() == doctest::Approx(0.3).epsilon(1e-9));
}

TEST_CASE("too few points are rejected") {
  const std::vector<Vec3> two(2, Vec3::Zero());
  CHECK_THROWS_AS(SimilarityAlign(two, two), Error);
  CHECK_THROWS_AS(SimilarityAlign(std::vector<Vec3>(3), std::vector<Vec3>(4)), Error);
}

TEST_CASE("error stats examples") {
  const std::vector<double> a{1, 2, 3};
  ErrorStats s = ComputeErrorStats(a);
  CHECK(s.median == 2.0);
  CHECK(s.mean == 2.0);
  CHECK(s.max == 3.0);
  const std::vector<double> b{0, 0, 0, 10};
  s = ComputeErrorStats(b);
  CHECK(s.median == 0.0);
  CHECK(s.mean == 2.5);
  CHECK(s.max == 10.0);
  const std::vector<double> c{4, 1, 3, 2};
  CHECK(ComputeErrorStats(c).median == 2.5);
}

TEST_CASE("error stats match a sort-based recomputation") {
  Rng rng(64);
  for (int n : {1000, 1001}) {
    std::vector<double> e(n);
    for (double& v : e) v = std::abs(rng.Normal());
    const ErrorStats s = ComputeErrorStats(e);
    std::vector<double> sorted = e;
    std::sort(sorted.begin(), sorted.end());
    const double median = n % 2 ? sorted[n / 2]
                                : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    double sum = 0.0;
    for (double v : sorted) sum += v;
    CHECK(s.median == median);
    CHECK(s.mean == doctest::Approx(sum / n).epsilon(1e-14));
    CHECK(s.max == sorted.back());
  }
}

TEST_CASE("metrics record fields") {
  Rng rng(65);
  const std::vector<Vec3> gt = RandomPoints(rng, 5);
  const nlohmann::json j = MetricsToJson(SimilarityAlign(gt, gt));
  for (const char* key : {"median", "mean", "max", "scale", "rotation_angle_deg",
                          "n_cameras"}) {
    CHECK(j.contains(key));
  }
  CHECK(j.at("n_cameras").get<int>() == 5);
}

}  // TEST_SUITE
