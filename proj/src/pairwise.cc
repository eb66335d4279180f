#include "transolve/pairwise.h"

#include <algorithm>
#include <cmath>

namespace transolve {

const char* ToString(TriangleStatus status) {
  switch (status) {
    case TriangleStatus::kOk:
      return "ok";
    case TriangleStatus::kDegenerateRays:
      return "degenerate_rays";
    case TriangleStatus::kNegativeDepth:
      return "negative_depth";
  }
  return "unknown";
}

UnitVector BaselineDirection(const Rotation& /*r_i*/, const Rotation& r_j,
                             const UnitVector& t_ij) {
  return UnitVector(-(r_j.inverse() * t_ij.vec()));
}

TriangleStatus MiddlePointRatios(const UnitVector& c_ij, const UnitVector& m_i,
                                 const UnitVector& m_j, RayRatios* ratios) {
  const Vec3 n = m_i.vec().cross(m_j.vec());
  if (n.norm() < std::sin(DegToRad(kMinTriangulationAngleDeg))) {
    return TriangleStatus::kDegenerateRays;
  }
  Eigen::Matrix<double, 3, 2> design;
  design.col(0) = m_i.vec();
  design.col(1) = -m_j.vec();
  const Eigen::Vector2d s =
      design.colPivHouseholderQr().solve(c_ij.vec());
  ratios->s_i = s[0];
  ratios->s_j = s[1];
  if (!(s[0] > 0.0) || !(s[1] > 0.0)) return TriangleStatus::kNegativeDepth;
  return TriangleStatus::kOk;
}

TriangleStatus ComputeTriangleCoefficients(const Rotation& r_i,
                                           const Rotation& r_j,
                                           const UnitVector& t_ij,
                                           const Observation& obs_i,
                                           const Observation& obs_j,
                                           TriangleCoefficients* tc) {
  const UnitVector m_i = r_i.inverse() * obs_i.bearing;
  const UnitVector m_j = r_j.inverse() * obs_j.bearing;
  const UnitVector c_ij = BaselineDirection(r_i, r_j, t_ij);

  RayRatios ratios;
  const TriangleStatus status = MiddlePointRatios(c_ij, m_i, m_j, &ratios);
  if (status != TriangleStatus::kOk) return status;

  tc->cam_i = obs_i.camera_id;
  tc->cam_j = obs_j.camera_id;
  tc->c_ij = c_ij;
  tc->m_i = m_i;
  tc->m_j = m_j;
  tc->s_i = ratios.s_i;
  tc->s_j = ratios.s_j;
  tc->a_i = ratios.s_i * RotationBetween(c_ij, m_i).matrix();
  tc->a_j = ratios.s_j * RotationBetween(-c_ij, m_j).matrix();
  tc->triangulation_angle_deg =
      RadToDeg(std::acos(std::clamp(m_i.dot(m_j), -1.0, 1.0)));
  return TriangleStatus::kOk;
}

Vec3 TrianglePoint(const TriangleCoefficients& tc, const Vec3& c_i,
                   const Vec3& c_j) {
  return 0.5 * ((tc.a_j - tc.a_i) * (c_i - c_j) + c_i + c_j);
}

}  // namespace transolve
