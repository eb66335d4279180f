#pragma once

#include <span>
#include <vector>

#include "json.hpp"
#include "transolve/geometry.h"

namespace transolve {

struct ErrorStats {
  double median = 0.0;
  double mean = 0.0;
  double max = 0.0;
};

// Median averages the two middle values for an even count. Empty input
// yields zeros.
ErrorStats ComputeErrorStats(std::span<const double> errors);

struct AlignmentResult {
  double scale = 1.0;
  Rotation rotation;
  Vec3 translation = Vec3::Zero();
  std::vector<double> per_camera_error;
  double median_error = 0.0;
  double mean_error = 0.0;
  double max_error = 0.0;
  // Set when the cross-covariance has rank < 2 (collinear points); the
  // rotation is then the minimal-angle rotation between the point lines.
  bool degenerate = false;
};

// Closed-form least-squares similarity gt_i ~ scale * R * est_i + t, with
// errors |scale * R * est_i + t - gt_i| filled in. Needs at least three
// correspondences (throws Error(kInvalidInput) otherwise).
AlignmentResult SimilarityAlign(const std::vector<Vec3>& est,
                                const std::vector<Vec3>& gt);

// {median, mean, max, scale, rotation_angle_deg, n_cameras}
nlohmann::json MetricsToJson(const AlignmentResult& result);

}  // namespace transolve
