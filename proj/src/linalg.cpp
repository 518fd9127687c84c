// SPDX-License-Identifier: Apache-2.0
#include "infsup/linalg.hpp"

#include <suitesparse/umfpack.h>

#include <cmath>
#include <string>

namespace infsup
{

ComplexLU::ComplexLU(const SparseMatrixc &matrix) : n_(matrix.rows())
{
  if (matrix.rows() != matrix.cols())
  {
    throw Error("LU factorization needs a square matrix");
  }
  SparseMatrixc a = matrix;
  a.makeCompressed();
  colptr_.assign(a.outerIndexPtr(), a.outerIndexPtr() + a.cols() + 1);
  rowind_.assign(a.innerIndexPtr(), a.innerIndexPtr() + a.nonZeros());
  values_.resize(2 * a.nonZeros());
  for (Eigen::Index i = 0; i < a.nonZeros(); ++i)
  {
    values_[2 * i] = a.valuePtr()[i].real();
    values_[2 * i + 1] = a.valuePtr()[i].imag();
  }
  if (n_ == 0)
  {
    return;
  }

  double control[UMFPACK_CONTROL];
  double info[UMFPACK_INFO];
  umfpack_zl_defaults(control);
  void *symbolic = nullptr;
  long status = umfpack_zl_symbolic(n_, n_, colptr_.data(), rowind_.data(), values_.data(),
                                    nullptr, &symbolic, control, info);
  if (status != UMFPACK_OK)
  {
    umfpack_zl_free_symbolic(&symbolic);
    throw Error("sparse LU analysis failed (status " + std::to_string(status) + ")");
  }
  status = umfpack_zl_numeric(colptr_.data(), rowind_.data(), values_.data(), nullptr, symbolic,
                              &numeric_, control, info);
  umfpack_zl_free_symbolic(&symbolic);
  const double rcond = info[UMFPACK_RCOND];
  if (status == UMFPACK_WARNING_singular_matrix || (status == UMFPACK_OK && !(rcond > 1e-15)))
  {
    umfpack_zl_free_numeric(&numeric_);
    throw SingularSystemError("matrix is numerically singular (reciprocal condition " +
                              std::to_string(rcond) + ")");
  }
  if (status != UMFPACK_OK)
  {
    umfpack_zl_free_numeric(&numeric_);
    throw Error("sparse LU factorization failed (status " + std::to_string(status) + ")");
  }
}

ComplexLU::~ComplexLU()
{
  if (numeric_ != nullptr)
  {
    umfpack_zl_free_numeric(&numeric_);
  }
}

VectorXc ComplexLU::solve(const VectorXc &rhs, Mode mode) const
{
  if (rhs.size() != n_)
  {
    throw Error("right-hand side has wrong length");
  }
  VectorXc x(n_);
  if (n_ == 0)
  {
    return x;
  }
  long sys = UMFPACK_A;
  if (mode == Mode::Transpose)
  {
    sys = UMFPACK_Aat;
  }
  else if (mode == Mode::Adjoint)
  {
    sys = UMFPACK_At;
  }
  double control[UMFPACK_CONTROL];
  double info[UMFPACK_INFO];
  umfpack_zl_defaults(control);
  const long status = umfpack_zl_solve(sys, colptr_.data(), rowind_.data(), values_.data(), nullptr,
                                       reinterpret_cast<double *>(x.data()), nullptr,
                                       reinterpret_cast<const double *>(rhs.data()), nullptr,
                                       numeric_, control, info);
  if (status != UMFPACK_OK)
  {
    throw SingularSystemError("sparse LU solve failed (status " + std::to_string(status) + ")");
  }
  return x;
}

VectorXc ComplexLU::solve_conjugate(const VectorXc &rhs) const
{
  return solve(rhs.conjugate()).conjugate();
}

// ---------------------------------------------------------------------------

EigenResult dense_pencil_max(const MatrixXc &a, const Eigen::VectorXd &b, double hermitian_tol)
{
  const Eigen::Index n = a.rows();
  if (a.cols() != n || b.size() != n || n == 0)
  {
    throw Error("dense pencil: inconsistent dimensions");
  }
  if ((b.array() <= 0.0).any())
  {
    throw Error("dense pencil: weight must be positive");
  }
  EigenResult result;
  result.dense = true;
  const double scale = a.norm();
  result.hermitian_defect = scale > 0.0 ? (a - a.adjoint()).norm() / scale : 0.0;
  if (result.hermitian_defect > hermitian_tol)
  {
    throw Error("dense pencil: matrix is not Hermitian (relative defect " +
                std::to_string(result.hermitian_defect) + ")");
  }
  const Eigen::VectorXd s = b.cwiseSqrt().cwiseInverse();
  MatrixXc scaled = s.asDiagonal() * (0.5 * (a + a.adjoint())) * s.asDiagonal();
  Eigen::SelfAdjointEigenSolver<MatrixXc> solver(scaled);
  if (solver.info() != Eigen::Success)
  {
    throw ConvergenceError("dense Hermitian eigensolver failed");
  }
  result.value = solver.eigenvalues()(n - 1);
  result.vector = s.asDiagonal() * solver.eigenvectors().col(n - 1);
  const VectorXc r = scaled * solver.eigenvectors().col(n - 1) -
                     result.value * solver.eigenvectors().col(n - 1);
  result.residual = result.value > 0.0 ? r.norm() / result.value : r.norm();
  return result;
}

EigenResult lanczos_max(const Operator &op, const Operator &weight, Eigen::Index n,
                        const LanczosOptions &options)
{
  if (n == 0)
  {
    throw Error("Lanczos: empty problem");
  }
  const Eigen::Index max_steps = std::min<Eigen::Index>(n, options.max_iterations);
  MatrixXc basis(n, max_steps);
  MatrixXc weighted(n, max_steps);
  std::vector<double> alpha;
  std::vector<double> beta;

  VectorXc v(n);
  for (Eigen::Index i = 0; i < n; ++i)
  {
    v(i) = Complex(1.0 + 0.3 * std::sin(1.7 * i + 0.4), 0.2 * std::cos(0.9 * i));
  }
  VectorXc wv = weight(v);
  double norm = std::sqrt(std::abs(v.dot(wv)));
  v /= norm;
  wv /= norm;

  EigenResult result;
  double ritz = 0.0;
  Eigen::VectorXd ritz_vector;
  for (Eigen::Index j = 0; j < max_steps; ++j)
  {
    basis.col(j) = v;
    weighted.col(j) = wv;
    VectorXc w = op(v);
    const double a = weighted.col(j).dot(w).real();
    alpha.push_back(a);
    // two passes of classical Gram-Schmidt in the weighted inner product
    for (int pass = 0; pass < 2; ++pass)
    {
      const VectorXc coeff = weighted.leftCols(j + 1).adjoint() * w;
      w -= basis.leftCols(j + 1) * coeff;
    }
    VectorXc ww = weight(w);
    const double b = std::sqrt(std::abs(w.dot(ww)));

    const auto m = static_cast<Eigen::Index>(alpha.size());
    Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
    {
      tri(i, i) = alpha[i];
      if (i + 1 < m)
      {
        tri(i, i + 1) = tri(i + 1, i) = beta[i];
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tsolver(tri);
    ritz = tsolver.eigenvalues()(m - 1);
    ritz_vector = tsolver.eigenvectors().col(m - 1);
    const double residual = b * std::abs(ritz_vector(m - 1));
    result.iterations = static_cast<int>(m);
    result.residual = ritz > 0.0 ? residual / ritz : residual;

    const bool invariant = b <= 1e-14 * std::max(std::abs(ritz), 1e-300);
    if (residual <= options.tol * std::abs(ritz) || invariant || m == n)
    {
      result.value = ritz;
      result.vector = basis.leftCols(m) * ritz_vector.cast<Complex>();
      return result;
    }
    if (j + 1 == max_steps)
    {
      if (options.allow_unconverged)
      {
        result.value = ritz;
        result.vector = basis.leftCols(m) * ritz_vector.cast<Complex>();
        result.converged = false;
        return result;
      }
      break;
    }
    beta.push_back(b);
    v = w / b;
    wv = ww / b;
  }
  throw ConvergenceError("Lanczos did not converge in " + std::to_string(max_steps) +
                         " steps (relative residual " + std::to_string(result.residual) + ")");
}

} // namespace infsup
