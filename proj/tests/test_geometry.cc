#include <cmath>
#include <numbers>

#include "doctest.h"
#include "test_util.h"
#include "transolve/geometry.h"

using namespace transolve;
using transolve::testing::RandomRotation;
using transolve::testing::RandomUnit;

TEST_SUITE("geometry") {

TEST_CASE("unit vector normalizes and rejects zero") {
  const UnitVector u(3.0, 0.0, 4.0);
  CHECK(std::abs(u.vec().norm() - 1.0) < 1e-12);
  CHECK(u.x() == doctest::Approx(0.6));
  CHECK_THROWS_AS(UnitVector(0.0, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("rotation invariants hold after construction and composition") {
  Rng rng(1);
  Rotation acc;
  for (int k = 0; k < 200; ++k) {
    const Rotation r = RandomRotation(rng);
    acc = acc * r;
    for (const Rotation& q : {r, acc}) {
      CHECK(std::abs(q.quaternion().norm() - 1.0) < 1e-12);
      const Mat3 m = q.matrix();
      CHECK((m.transpose() * m - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-10);
      CHECK(std::abs(m.determinant() - 1.0) < 1e-10);
    }
  }
}

TEST_CASE("from matrix and exp/log round trip") {
  Rng rng(2);
  for (int k = 0; k < 50; ++k) {
    const Rotation r = RandomRotation(rng);
    CHECK(GeodesicAngleDeg(Rotation::FromMatrix(r.matrix()), r) < 1e-9);
    CHECK(GeodesicAngleDeg(Rotation::Exp(r.Log()), r) < 1e-9);
  }
}

TEST_CASE("rotation_between examples") {
  const UnitVector x(1, 0, 0), y(0, 1, 0), mx(-1, 0, 0);
  CHECK(RotationBetween(x, x).Angle() < 1e-12);

  const Rotation rz = RotationBetween(x, y);
  CHECK(RadToDeg(rz.Angle()) == doctest::Approx(90.0));
  CHECK((rz.Log().normalized() - Vec3::UnitZ()).norm() < 1e-12);

  const Rotation ry = RotationBetween(x, mx);
  CHECK(RadToDeg(ry.Angle()) == doctest::Approx(180.0));
  const Vec3 axis = ry.Log().normalized();
  CHECK(std::abs(std::abs(axis.y()) - 1.0) < 1e-12);
  CHECK(((ry * x).vec() - mx.vec()).norm() < 1e-12);
}

TEST_CASE("rotation_between maps u to v with minimal angle") {
  Rng rng(3);
  for (int k = 0; k < 500; ++k) {
    const UnitVector u = RandomUnit(rng);
    const UnitVector v = RandomUnit(rng);
    const Rotation r = RotationBetween(u, v);
    CHECK(((r * u).vec() - v.vec()).norm() < 1e-10);
    CHECK(r.Angle() == doctest::Approx(std::acos(u.dot(v))).epsilon(1e-9));
    const Vec3 cross = u.vec().cross(v.vec());
    if (cross.norm() > 1e-6) {
      CHECK((r.Log().normalized() - cross.normalized()).norm() < 1e-8);
    }
    CHECK((RotationBetween(v, u) * r).Angle() < 1e-9);
  }
}

TEST_CASE("rotation_between antipodal fallback is deterministic") {
  Rng rng(4);
  for (int k = 0; k < 100; ++k) {
    const UnitVector u = RandomUnit(rng);
    const Rotation r = RotationBetween(u, -u);
    CHECK(((r * u).vec() + u.vec()).norm() < 1e-10);
    CHECK(RadToDeg(r.Angle()) == doctest::Approx(180.0));
    CHECK((RotationBetween(-u, u) * r).Angle() < 1e-9);
  }
}

TEST_CASE("geodesic angle examples") {
  CHECK(GeodesicAngleDeg(Rotation(), Rotation()) == 0.0);
  const Rotation r10 = Rotation::FromAngleAxis(DegToRad(10.0), Vec3::UnitZ());
  CHECK(GeodesicAngleDeg(r10, Rotation()) == doctest::Approx(10.0));
}

TEST_CASE("geodesic angle matches the quaternion-dot oracle") {
  Rng rng(5);
  for (int k = 0; k < 1000; ++k) {
    const Rotation a = RandomRotation(rng);
    const Rotation b = RandomRotation(rng);
    const double dot = std::min(1.0, std::abs(a.quaternion().dot(b.quaternion())));
    const double oracle = 2.0 * std::acos(dot) * 180.0 / std::numbers::pi;
    CHECK(std::abs(GeodesicAngleDeg(a, b) - oracle) < 1e-7);
  }
}

TEST_CASE("geodesic angle is symmetric and obeys the triangle inequality") {
  Rng rng(6);
  for (int k = 0; k < 1000; ++k) {
    const Rotation a = RandomRotation(rng);
    const Rotation b = RandomRotation(rng);
    const Rotation c = RandomRotation(rng);
    const double ab = GeodesicAngleDeg(a, b);
    CHECK(std::abs(ab - GeodesicAngleDeg(b, a)) < 1e-8);
    CHECK(GeodesicAngleDeg(a, c) <= ab + GeodesicAngleDeg(b, c) + 1e-8);
    CHECK(ab >= 0.0);
    CHECK(ab <= 180.0);
  }
}

}  // TEST_SUITE
