#include "transolve/geometry.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace transolve {

namespace {
constexpr double kEps = std::numeric_limits<double>::epsilon();
}  // namespace

UnitVector::UnitVector(const Vec3& v) {
  const double n = v.norm();
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw std::invalid_argument("UnitVector: zero or non-finite vector");
  }
  // Already-unit input is kept bit-exact so that files round-trip.
  v_ = std::abs(n - 1.0) <= 4.0 * kEps ? v : Vec3(v / n);
}

UnitVector UnitVector::operator-() const { return UnitVector(-v_); }

Rotation::Rotation(const Eigen::Quaterniond& q) : q_(q) {
  const double n = q.norm();
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw std::invalid_argument("Rotation: zero or non-finite quaternion");
  }
  if (std::abs(n - 1.0) > 4.0 * kEps) q_.coeffs() /= n;
  // Canonical hemisphere keeps serialized output stable.
  if (q_.w() < 0.0) q_.coeffs() = -q_.coeffs();
}

Rotation Rotation::FromMatrix(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0.0) {
    Mat3 u = svd.matrixU();
    u.col(2) *= -1.0;
    r = u * svd.matrixV().transpose();
  }
  return Rotation(Eigen::Quaterniond(r));
}

Rotation Rotation::FromAngleAxis(double angle_rad, const Vec3& axis) {
  return Rotation(Eigen::Quaterniond(
      Eigen::AngleAxisd(angle_rad, axis.normalized())));
}

Rotation Rotation::Exp(const Vec3& omega) {
  const double angle = omega.norm();
  if (angle < 1e-300) return Rotation();
  return FromAngleAxis(angle, omega / angle);
}

double Rotation::Angle() const {
  return 2.0 * std::atan2(q_.vec().norm(), std::abs(q_.w()));
}

Vec3 Rotation::Log() const {
  const double vn = q_.vec().norm();
  if (vn < 1e-300) return Vec3::Zero();
  // w >= 0 by construction, so the angle lies in [0, pi].
  const double angle = 2.0 * std::atan2(vn, q_.w());
  return q_.vec() / vn * angle;
}

Rotation RotationBetween(const UnitVector& u, const UnitVector& v) {
  const double d = u.dot(v);
  if (d < -1.0 + 1e-9) {
    const Vec3& a = u.vec();
    int k = 0;
    for (int i = 1; i < 3; ++i) {
      if (std::abs(a[i]) < std::abs(a[k])) k = i;
    }
    Vec3 axis = Vec3::Unit(k);
    axis -= axis.dot(a) * a;
    return Rotation::FromAngleAxis(std::numbers::pi, axis);
  }
  // Half-way quaternion: (1 + u.v, u x v) normalizes to the minimal rotation.
  const Vec3 c = u.vec().cross(v.vec());
  return Rotation(Eigen::Quaterniond(1.0 + d, c.x(), c.y(), c.z()));
}

double GeodesicAngleDeg(const Rotation& ra, const Rotation& rb) {
  return RadToDeg((ra * rb.inverse()).Angle());
}

double DegToRad(double deg) { return deg * std::numbers::pi / 180.0; }
double RadToDeg(double rad) { return rad * 180.0 / std::numbers::pi; }

}  // namespace transolve
