#pragma once

#include "transolve/geometry.h"

namespace transolve {

// Smallest accepted angle between the two rays of a (track, pair) triangle.
inline constexpr double kMinTriangulationAngleDeg = 1.0;

struct Observation {
  int camera_id = 0;
  // Direction toward the scene point in the observing camera's frame.
  UnitVector bearing;
};

enum class TriangleStatus { kOk, kDegenerateRays, kNegativeDepth };

const char* ToString(TriangleStatus status);

// Ray lengths per unit baseline.
struct RayRatios {
  double s_i = 0.0;
  double s_j = 0.0;
};

// Known quantities of one triangle formed by two camera centers and a scene
// point, all expressed in the world frame. With L = |c_j - c_i| the scene
// point is
//   p = 1/2 ((A_j - A_i)(c_i - c_j) + c_i + c_j)
// where A_i = s_i R_i(theta) maps the baseline direction c_ij onto s_i m_i
// and A_j = s_j R_j(theta) maps -c_ij onto s_j m_j.
struct TriangleCoefficients {
  int cam_i = 0;
  int cam_j = 0;
  Mat3 a_i = Mat3::Zero();
  Mat3 a_j = Mat3::Zero();
  UnitVector c_ij;
  double s_i = 0.0;
  double s_j = 0.0;
  // World-frame rays.
  UnitVector m_i;
  UnitVector m_j;
  // Angle between m_i and m_j in degrees.
  double triangulation_angle_deg = 0.0;
};

// World direction from c_i toward c_j, -R_j^T t_ij, where t_ij is the
// relative translation direction expressed in camera j
// (R_j (c_i - c_j) is parallel to t_ij).
UnitVector BaselineDirection(const Rotation& r_i, const Rotation& r_j,
                             const UnitVector& t_ij);

// Middle-point triangulation with c_i at the origin and c_j = c_ij. Solves
// s_i m_i - s_j m_j = c_ij in the least-squares sense, which places
// c_i + s_i m_i and c_j + s_j m_j at the feet of the common perpendicular.
TriangleStatus MiddlePointRatios(const UnitVector& c_ij, const UnitVector& m_i,
                                 const UnitVector& m_j, RayRatios* ratios);

TriangleStatus ComputeTriangleCoefficients(const Rotation& r_i,
                                           const Rotation& r_j,
                                           const UnitVector& t_ij,
                                           const Observation& obs_i,
                                           const Observation& obs_j,
                                           TriangleCoefficients* tc);

// Midpoint of the triangle for given camera centers.
Vec3 TrianglePoint(const TriangleCoefficients& tc, const Vec3& c_i,
                   const Vec3& c_j);

}  // namespace transolve
