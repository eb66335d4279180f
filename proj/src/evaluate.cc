#include "transolve/evaluate.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "transolve/error.h"

namespace transolve {

ErrorStats ComputeErrorStats(std::span<const double> errors) {
  ErrorStats stats;
  if (errors.empty()) return stats;
  std::vector<double> sorted(errors.begin(), errors.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  stats.median = n % 2 == 1 ? sorted[n / 2]
                            : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  stats.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) /
               static_cast<double>(n);
  stats.max = sorted.back();
  return stats;
}

AlignmentResult SimilarityAlign(const std::vector<Vec3>& est,
                                const std::vector<Vec3>& gt) {
  if (est.size() != gt.size() || est.size() < 3) {
    throw Error(ErrorCode::kInvalidInput,
                "similarity alignment needs >= 3 corresponding points");
  }
  const double n = static_cast<double>(est.size());
  Vec3 mu_e = Vec3::Zero();
  Vec3 mu_g = Vec3::Zero();
  for (std::size_t k = 0; k < est.size(); ++k) {
    mu_e += est[k];
    mu_g += gt[k];
  }
  mu_e /= n;
  mu_g /= n;

  Mat3 cross = Mat3::Zero();
  Mat3 cov_e = Mat3::Zero();
  Mat3 cov_g = Mat3::Zero();
  double var_e = 0.0;
  for (std::size_t k = 0; k < est.size(); ++k) {
    const Vec3 de = est[k] - mu_e;
    const Vec3 dg = gt[k] - mu_g;
    cross += dg * de.transpose();
    cov_e += de * de.transpose();
    cov_g += dg * dg.transpose();
    var_e += de.squaredNorm();
  }

  AlignmentResult result;
  if (var_e > 0.0) {
    Eigen::JacobiSVD<Mat3> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Vec3 sv = svd.singularValues();
    if (sv[1] <= 1e-10 * sv[0]) {
      // Collinear: rotate the principal line of est onto that of gt.
      result.degenerate = true;
      Eigen::SelfAdjointEigenSolver<Mat3> ee(cov_e);
      Eigen::SelfAdjointEigenSolver<Mat3> eg(cov_g);
      const Vec3 d_e = ee.eigenvectors().col(2);
      Vec3 d_g = eg.eigenvectors().col(2);
      if (d_g.dot(cross * d_e) < 0.0) d_g = -d_g;
      result.rotation = RotationBetween(UnitVector(d_e), UnitVector(d_g));
    } else {
      Mat3 s = Mat3::Identity();
      if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0) {
        s(2, 2) = -1.0;
      }
      result.rotation =
          Rotation::FromMatrix(svd.matrixU() * s * svd.matrixV().transpose());
    }
    const Mat3 r = result.rotation.matrix();
    result.scale = (r * cross.transpose()).trace() / var_e;
    if (!(result.scale > 0.0)) result.scale = 1.0;
  }
  result.translation = mu_g - result.scale * (result.rotation * mu_e);

  for (std::size_t k = 0; k < est.size(); ++k) {
    const Vec3 mapped =
        result.scale * (result.rotation * est[k]) + result.translation;
    result.per_camera_error.push_back((mapped - gt[k]).norm());
  }
  const ErrorStats stats = ComputeErrorStats(result.per_camera_error);
  result.median_error = stats.median;
  result.mean_error = stats.mean;
  result.max_error = stats.max;
  return result;
}

nlohmann::json MetricsToJson(const AlignmentResult& result) {
  return {{"median", result.median_error},
          {"mean", result.mean_error},
          {"max", result.max_error},
          {"scale", result.scale},
          {"rotation_angle_deg", RadToDeg(result.rotation.Angle())},
          {"n_cameras", result.per_camera_error.size()}};
}

}  // namespace transolve
