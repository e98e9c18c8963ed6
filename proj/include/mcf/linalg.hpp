#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "mcf/femcore.hpp"

namespace mcf {

enum class Preconditioner { none, jacobi };

struct CgConfig {
  double rel_tol = 1e-10;
  double abs_floor = 1e-14;
  int max_iterations = 0;  // 0 picks 10 * n
  Preconditioner preconditioner = Preconditioner::jacobi;
  std::vector<double>* residual_history = nullptr;  // optional per-iteration 2-norms
};

struct CgResult {
  std::vector<double> solution;
  int iterations = 0;
  double residual = 0.0;
};

// Thrown when the iteration cap is reached; carries the final residual so
// callers can treat non-convergence as a singularity signal.
struct CgFailure : std::runtime_error {
  CgFailure(int iterations, double residual);
  int iterations;
  double residual;
};

// Conjugate gradients for symmetric positive definite matrices, starting
// from zero, stopping at |r|_2 <= max(rel_tol * |b|_2, abs_floor).
CgResult cg_solve(const SparseMatrix& matrix, std::span<const double> rhs, const CgConfig& config = {});

// Independent solves sharing one preconditioner setup.
std::vector<CgResult> multi_rhs_solve(const SparseMatrix& matrix, const std::vector<std::vector<double>>& rhs,
                                      const CgConfig& config = {});

}  // namespace mcf
