#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace transolve {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// A 3D direction with unit Euclidean norm.
class UnitVector {
 public:
  UnitVector() : v_(1.0, 0.0, 0.0) {}
  // Normalizes the input. Throws std::invalid_argument on a zero vector.
  explicit UnitVector(const Vec3& v);
  UnitVector(double x, double y, double z) : UnitVector(Vec3(x, y, z)) {}

  const Vec3& vec() const { return v_; }
  double x() const { return v_.x(); }
  double y() const { return v_.y(); }
  double z() const { return v_.z(); }
  double dot(const UnitVector& o) const { return v_.dot(o.v_); }

  UnitVector operator-() const;

 private:
  Vec3 v_;
};

/// Element of SO(3) stored as a unit quaternion.
///
/// World-to-camera convention throughout the library: a world point X is
/// expressed in a camera with orientation R and center c as R * (X - c).
class Rotation {
 public:
  Rotation() : q_(Eigen::Quaterniond::Identity()) {}
  // The quaternion is normalized; q and -q describe the same rotation.
  explicit Rotation(const Eigen::Quaterniond& q);
  // Nearest rotation to an (approximately) orthonormal matrix.
  static Rotation FromMatrix(const Mat3& m);
  static Rotation FromAngleAxis(double angle_rad, const Vec3& axis);
  // Exponential map of a rotation vector (axis * angle in radians).
  static Rotation Exp(const Vec3& omega);
  static Rotation Identity() { return Rotation(); }

  const Eigen::Quaterniond& quaternion() const { return q_; }
  Mat3 matrix() const { return q_.toRotationMatrix(); }
  // Logarithm map: rotation vector with angle in [0, pi].
  Vec3 Log() const;
  // Rotation angle in radians, in [0, pi].
  double Angle() const;

  Rotation inverse() const { return Rotation(q_.conjugate()); }
  Rotation operator*(const Rotation& o) const { return Rotation(q_ * o.q_); }
  Vec3 operator*(const Vec3& v) const { return q_ * v; }
  UnitVector operator*(const UnitVector& v) const {
    return UnitVector(q_ * v.vec());
  }

 private:
  Eigen::Quaterniond q_;
};

// Minimal-angle rotation taking u onto v. For antipodal inputs the 180 degree
// rotation is taken about the coordinate axis most orthogonal to u (first
// axis wins ties), projected onto the plane orthogonal to u.
Rotation RotationBetween(const UnitVector& u, const UnitVector& v);

// Angle of ra * rb^T, in degrees within [0, 180].
double GeodesicAngleDeg(const Rotation& ra, const Rotation& rb);

double DegToRad(double deg);
double RadToDeg(double rad);

}  // namespace transolve
