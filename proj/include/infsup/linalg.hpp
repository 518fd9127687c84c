// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "infsup/common.hpp"

#include <functional>
#include <memory>

namespace infsup
{

/// Sparse complex LU (UMFPACK). One factorization serves solves with the
/// matrix, its transpose and its conjugate transpose.
class ComplexLU
{
public:
  enum class Mode
  {
    Plain,     // A x = b
    Transpose, // A^T x = b
    Adjoint    // A^H x = b
  };

  explicit ComplexLU(const SparseMatrixc &matrix);
  ~ComplexLU();
  ComplexLU(const ComplexLU &) = delete;
  ComplexLU &operator=(const ComplexLU &) = delete;

  Eigen::Index rows() const { return n_; }
  VectorXc solve(const VectorXc &rhs, Mode mode = Mode::Plain) const;

  /// Solve with the entrywise conjugate of the matrix.
  VectorXc solve_conjugate(const VectorXc &rhs) const;

private:
  Eigen::Index n_ = 0;
  std::vector<long> colptr_;
  std::vector<long> rowind_;
  std::vector<double> values_; // interleaved re/im
  void *numeric_ = nullptr;
};

using Operator = std::function<VectorXc(const VectorXc &)>;

struct EigenResult
{
  double value = 0.0;          // largest eigenvalue
  VectorXc vector;             // normalised in the pencil's B inner product
  double residual = 0.0;       // relative residual estimate
  double hermitian_defect = 0.0;
  int iterations = 0;
  bool dense = false;
  bool converged = true;
};

/// Largest eigenvalue of the Hermitian pencil (A, diag(b)), b > 0.
/// Throws Error when A deviates from Hermitian beyond `hermitian_tol`
/// (relative, Frobenius).
EigenResult dense_pencil_max(const MatrixXc &a, const Eigen::VectorXd &b,
                             double hermitian_tol = 1e-12);

struct LanczosOptions
{
  double tol = 1e-12;
  int max_iterations = 400;
  // Return the last Ritz pair (converged = false) instead of throwing when
  // the step budget runs out. Ritz values approach the maximum from below.
  bool allow_unconverged = false;
};

/// Largest eigenvalue of an operator that is self-adjoint and positive
/// semidefinite in the inner product <x, y> = y^H W x. `op` applies the
/// operator, `weight` applies W. Lanczos with full reorthogonalisation and a
/// deterministic start vector.
EigenResult lanczos_max(const Operator &op, const Operator &weight, Eigen::Index n,
                        const LanczosOptions &options = {});

} // namespace infsup
