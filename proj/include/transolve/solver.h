#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "transolve/assembly.h"

namespace transolve {

/// Largest eigenvalue of A^T A by power iteration from a seeded random start.
/// Iterates until the relative change of the estimate drops below tol; a
/// stagnating run is restarted once from a fresh vector.
double SpectralNormSq(const SparseMatrix& a, double tol = 1e-10,
                      std::uint64_t seed = 0);

// Soft thresholding: argmin_e eps |e| + 1/2 (e - u)^2, elementwise.
double Shrink(double u, double eps);
Eigen::VectorXd Shrink(const Eigen::VectorXd& u, double eps);

struct SingularVectorResult {
  Eigen::VectorXd x;
  double singular_value = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Unit vector minimizing |A x|_2: inverse iteration on A^T A + delta I with
// delta = 1e-12 * max(1, max diag(A^T A)), solved by sparse LDL^T.
SingularVectorResult SmallestSingularVector(const SparseMatrix& a,
                                            double tol = 1e-12,
                                            std::uint64_t seed = 0,
                                            int max_iterations = 2000);

struct AdmmParams {
  double beta0 = 1e-6;
  double beta_max = 1e6;
  double rho = 1.01;
  int max_iter = 10000;
  double tol_primal = 1e-10;
  double tol_change = 1e-8;
  double eta_safety = 1.05;
  std::uint64_t seed = 0;
  bool record_trace = true;

  // Throws Error(kInvalidInput) on beta0 <= 0, rho <= 1, eta_safety <= 1 or
  // beta_max < beta0.
  void Validate() const;
};

struct AdmmState {
  Eigen::VectorXd x;       // unit norm
  Eigen::VectorXd e;       // slack, tracks A x
  Eigen::VectorXd lambda;  // multiplier of A x - e = 0
  double beta = 0.0;
  int k = 0;
};

// e-update: shrink(A x_k + lambda_k / beta, 1 / beta).
Eigen::VectorXd UpdateE(const AdmmState& state, const SparseMatrix& a);

// Linearized x-update. With
//   C = x_k - (1/eta) A^T (A x_k - e_{k+1}) - 1/(beta eta) A^T lambda_k
// returns the projection C / |C| onto the unit sphere; state.e must already
// hold e_{k+1}. Returns false when |C| < 1e-14.
bool UpdateX(const AdmmState& state, const SparseMatrix& a, double eta,
             Eigen::VectorXd* x_next);

struct AdmmTraceEntry {
  int iteration = 0;
  double beta = 0.0;  // penalty used by this iteration
  double primal_residual = 0.0;  // |A x_k - e_k|_2
  double l1_objective = 0.0;     // |A x_k|_1
  double x_norm = 0.0;
};

struct AdmmResult {
  Eigen::VectorXd x;
  Eigen::VectorXd x_initial;
  bool converged = false;
  int iterations = 0;
  int restarts = 0;
  double eta = 0.0;
  std::vector<AdmmTraceEntry> trace;
};

// Linearized ADMM for min |A x|_1 s.t. |x| = 1, initialized from the
// smallest right singular vector. On hitting max_iter the iterate with the
// lowest L1 objective is returned with converged = false.
AdmmResult AdmmSolve(const SparseMatrix& a, const AdmmParams& params);

void WriteTraceCsv(const std::vector<AdmmTraceEntry>& trace,
                   const std::string& path);

}  // namespace transolve
