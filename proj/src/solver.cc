#include "transolve/solver.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>

#include <Eigen/SparseCholesky>

#include "transolve/error.h"
#include "transolve/random.h"

namespace transolve {

namespace {

Eigen::VectorXd RandomUnit(Rng& rng, Eigen::Index n) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.Normal();
  return v.normalized();
}

}  // namespace

double SpectralNormSq(const SparseMatrix& a, double tol, std::uint64_t seed) {
  Rng rng(seed);
  const Eigen::Index n = a.cols();
  constexpr int kMaxIterations = 20000;
  double estimate = 0.0;
  for (int attempt = 0; attempt < 2; ++attempt) {
    Eigen::VectorXd v = RandomUnit(rng, n);
    estimate = 0.0;
    for (int it = 0; it < kMaxIterations; ++it) {
      const Eigen::VectorXd w = a.transpose() * (a * v);
      const double next = v.dot(w);
      const double norm = w.norm();
      if (norm == 0.0) break;  // v in the null space; retry
      v = w / norm;
      if (std::abs(next - estimate) <= tol * std::abs(next)) {
        return next;
      }
      estimate = next;
    }
  }
  return estimate;
}

double Shrink(double u, double eps) {
  if (u > eps) return u - eps;
  if (u < -eps) return u + eps;
  return 0.0;
}

Eigen::VectorXd Shrink(const Eigen::VectorXd& u, double eps) {
  return u.unaryExpr([eps](double v) { return Shrink(v, eps); });
}

SingularVectorResult SmallestSingularVector(const SparseMatrix& a, double tol,
                                            std::uint64_t seed,
                                            int max_iterations) {
  const Eigen::Index n = a.cols();
  Eigen::SparseMatrix<double> normal =
      Eigen::SparseMatrix<double>(a.transpose()) * a;
  const double max_diag = normal.diagonal().maxCoeff();
  const double delta = 1e-12 * std::max(1.0, max_diag);
  for (Eigen::Index i = 0; i < n; ++i) normal.coeffRef(i, i) += delta;

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(normal);
  SingularVectorResult result;
  if (ldlt.info() != Eigen::Success) return result;

  Rng rng(seed);
  Eigen::VectorXd x = RandomUnit(rng, n);
  for (int it = 1; it <= max_iterations; ++it) {
    Eigen::VectorXd y = ldlt.solve(x);
    y.normalize();
    if (y.dot(x) < 0.0) y = -y;
    const double change = (y - x).norm();
    x = y;
    result.iterations = it;
    if (change < tol) {
      result.converged = true;
      break;
    }
  }
  result.x = x;
  result.singular_value = (a * x).norm();
  return result;
}

void AdmmParams::Validate() const {
  if (!(beta0 > 0.0) || !(rho > 1.0) || !(eta_safety > 1.0) ||
      !(beta_max >= beta0) || max_iter < 1) {
    throw Error(ErrorCode::kInvalidInput, "invalid ADMM parameters");
  }
}

Eigen::VectorXd UpdateE(const AdmmState& state, const SparseMatrix& a) {
  return Shrink(a * state.x + state.lambda / state.beta, 1.0 / state.beta);
}

bool UpdateX(const AdmmState& state, const SparseMatrix& a, double eta,
             Eigen::VectorXd* x_next) {
  const Eigen::VectorXd residual = a * state.x - state.e;
  const Eigen::VectorXd c =
      state.x - a.transpose() * (residual / eta +
                                 state.lambda / (state.beta * eta));
  const double norm = c.norm();
  if (norm < 1e-14) return false;
  *x_next = c / norm;
  return true;
}

AdmmResult AdmmSolve(const SparseMatrix& a, const AdmmParams& params) {
  params.Validate();
  Rng rng(params.seed);
  AdmmResult result;
  result.eta = params.eta_safety * SpectralNormSq(a, 1e-10, rng.NextU64());

  const SingularVectorResult init =
      SmallestSingularVector(a, 1e-12, rng.NextU64());
  result.x_initial = init.x;

  const Eigen::Index m = a.rows();
  AdmmState state;
  state.x = init.x;
  state.e = Eigen::VectorXd::Zero(m);
  state.lambda = Eigen::VectorXd::Zero(m);
  state.beta = params.beta0;

  Eigen::VectorXd best_x = state.x;
  double best_l1 = (a * state.x).lpNorm<1>();
  const double sqrt_m = std::sqrt(static_cast<double>(m));

  Eigen::VectorXd x_next;
  for (int k = 1; k <= params.max_iter; ++k) {
    state.k = k;
    state.e = UpdateE(state, a);
    if (!UpdateX(state, a, result.eta, &x_next)) {
      // Restart from a perturbed copy of the previous iterate.
      ++result.restarts;
      x_next = state.x + 1e-6 * RandomUnit(rng, state.x.size());
      x_next.normalize();
    }
    const Eigen::VectorXd ax = a * x_next;
    const Eigen::VectorXd primal = ax - state.e;
    state.lambda += state.beta * primal;
    const double change = (x_next - state.x).norm();
    state.x = x_next;

    const double primal_norm = primal.norm();
    const double l1 = ax.lpNorm<1>();
    if (params.record_trace) {
      result.trace.push_back({k, state.beta, primal_norm, l1, state.x.norm()});
    }
    if (l1 < best_l1) {
      best_l1 = l1;
      best_x = state.x;
    }
    state.beta = std::min(params.beta_max, params.rho * state.beta);
    result.iterations = k;

    if (primal_norm / sqrt_m < params.tol_primal &&
        change < params.tol_change) {
      result.converged = true;
      break;
    }
  }
  result.x = result.converged ? state.x : best_x;
  return result;
}

void WriteTraceCsv(const std::vector<AdmmTraceEntry>& trace,
                   const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kInvalidInput, "cannot write " + path);
  out << "iteration,beta,primal_residual,l1_objective\n";
  out << std::setprecision(17);
  for (const AdmmTraceEntry& t : trace) {
    out << t.iteration << ',' << t.beta << ',' << t.primal_residual << ','
        << t.l1_objective << '\n';
  }
}

}  // namespace transolve
