#include "mcf/linalg.hpp"

#include <cmath>
#include <string>

namespace mcf {

CgFailure::CgFailure(int iterations_, double residual_)
    : std::runtime_error("cg failed to converge after " + std::to_string(iterations_) +
                         " iterations (residual " + std::to_string(residual_) + ")"),
      iterations(iterations_),
      residual(residual_) {}

namespace {

double norm2(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

CgResult cg_with_diag(const SparseMatrix& matrix, std::span<const double> rhs, const CgConfig& config,
                      const std::vector<double>* inv_diag) {
  const int n = matrix.rows();
  if (static_cast<int>(rhs.size()) != n) throw std::invalid_argument("rhs size mismatch");
  const int max_iterations = config.max_iterations > 0 ? config.max_iterations : 10 * n;

  CgResult result;
  result.solution.assign(n, 0.0);
  if (config.residual_history) config.residual_history->clear();

  std::vector<double> r(rhs.begin(), rhs.end());
  const double rhs_norm = norm2(r);
  const double target = std::max(config.rel_tol * rhs_norm, config.abs_floor);
  double r_norm = rhs_norm;
  if (config.residual_history) config.residual_history->push_back(r_norm);
  if (r_norm <= target) {
    result.residual = r_norm;
    return result;
  }

  std::vector<double> z(n), p(n), ap(n);
  auto apply_precond = [&](const std::vector<double>& in, std::vector<double>& out) {
    if (inv_diag) {
      for (int i = 0; i < n; ++i) out[i] = (*inv_diag)[i] * in[i];
    } else {
      out = in;
    }
  };

  apply_precond(r, z);
  p = z;
  double rz = 0.0;
  for (int i = 0; i < n; ++i) rz += r[i] * z[i];

  for (int it = 1; it <= max_iterations; ++it) {
    matrix.multiply(p, ap);
    double pap = 0.0;
    for (int i = 0; i < n; ++i) pap += p[i] * ap[i];
    if (!(pap > 0.0) || !std::isfinite(pap)) throw CgFailure(it, r_norm);
    const double alpha = rz / pap;
    for (int i = 0; i < n; ++i) {
      result.solution[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    r_norm = norm2(r);
    if (config.residual_history) config.residual_history->push_back(r_norm);
    result.iterations = it;
    result.residual = r_norm;
    if (r_norm <= target) return result;
    apply_precond(r, z);
    double rz_next = 0.0;
    for (int i = 0; i < n; ++i) rz_next += r[i] * z[i];
    const double beta = rz_next / rz;
    rz = rz_next;
    for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  throw CgFailure(max_iterations, r_norm);
}

std::vector<double> inverse_diagonal(const SparseMatrix& matrix) {
  std::vector<double> d = matrix.diagonal();
  for (double& v : d) {
    if (!(v > 0.0)) throw std::invalid_argument("jacobi preconditioner needs a positive diagonal");
    v = 1.0 / v;
  }
  return d;
}

}  // namespace

CgResult cg_solve(const SparseMatrix& matrix, std::span<const double> rhs, const CgConfig& config) {
  if (config.preconditioner == Preconditioner::jacobi) {
    const std::vector<double> inv_diag = inverse_diagonal(matrix);
    return cg_with_diag(matrix, rhs, config, &inv_diag);
  }
  return cg_with_diag(matrix, rhs, config, nullptr);
}

std::vector<CgResult> multi_rhs_solve(const SparseMatrix& matrix, const std::vector<std::vector<double>>& rhs,
                                      const CgConfig& config) {
  std::vector<double> inv_diag;
  const std::vector<double>* diag_ptr = nullptr;
  if (config.preconditioner == Preconditioner::jacobi) {
    inv_diag = inverse_diagonal(matrix);
    diag_ptr = &inv_diag;
  }
  std::vector<CgResult> results;
  results.reserve(rhs.size());
  for (const auto& b : rhs) results.push_back(cg_with_diag(matrix, b, config, diag_ptr));
  return results;
}

}  // namespace mcf
