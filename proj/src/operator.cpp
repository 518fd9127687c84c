// SPDX-License-Identifier: Apache-2.0
#include "infsup/operator.hpp"

#include <cmath>

namespace infsup
{

namespace
{

const char *const not_invertible = "discrete problem not invertible on this mesh; refine or change k";

}

SolutionOperator::SolutionOperator(const FeSystem &system, double tol) : system_(&system), tol_(tol)
{
  try
  {
    lu_ = std::make_unique<ComplexLU>(system.C);
  }
  catch (const SingularSystemError &e)
  {
    throw SingularSystemError(std::string(not_invertible) + " (" + e.what() + ")");
  }
}

double SolutionOperator::relative_residual(const VectorXc &theta, const VectorXc &x) const
{
  const VectorXc rhs = system_->G.cast<Complex>() * theta.conjugate();
  const double scale = rhs.norm();
  const double r = (system_->C * x.conjugate() - rhs).norm();
  return scale > 0.0 ? r / scale : r;
}

VectorXc SolutionOperator::apply(const VectorXc &theta) const
{
  if (theta.size() != system_->Q.size())
  {
    throw Error("theta has wrong length");
  }
  const VectorXc g = system_->G.cast<Complex>() * theta;
  VectorXc x = lu_->solve_conjugate(g);
  double res = relative_residual(theta, x);
  if (!(res <= tol_))
  {
    // one step of refinement before giving up
    const VectorXc r = g - system_->C.conjugate() * x;
    x += lu_->solve_conjugate(r);
    res = relative_residual(theta, x);
    if (!(res <= tol_))
    {
      throw SingularSystemError(std::string(not_invertible) + " (relative residual " +
                                std::to_string(res) + ")");
    }
  }
  return x;
}

VectorXc SolutionOperator::apply_adjoint(const VectorXc &y) const
{
  return system_->G.cast<Complex>().transpose() * lu_->solve(y, ComplexLU::Mode::Transpose);
}

ThetaResult compute_theta(const SolutionOperator &op, const SpectralOptions &options)
{
  const FeSystem &sys = op.system();
  const Eigen::Index n = sys.Q.size();
  const double k2 = sys.spec.k * sys.spec.k;
  const Eigen::VectorXd weight = k2 * sys.mq;
  const SparseMatrixc e = sys.E.cast<Complex>();

  const bool dense = options.path == EigenPath::Dense ||
                     (options.path == EigenPath::Automatic && n <= options.dense_threshold);
  EigenResult eig;
  if (dense)
  {
    MatrixXc t(sys.V.size(), n);
    parallel_for(static_cast<std::size_t>(n), options.threads,
                 [&](std::size_t j)
                 {
                   VectorXc unit = VectorXc::Zero(n);
                   unit(static_cast<Eigen::Index>(j)) = 1.0;
                   t.col(static_cast<Eigen::Index>(j)) = op.apply(unit);
                 });
    const MatrixXc et = e * t;
    eig = dense_pencil_max(t.adjoint() * et, weight);
  }
  else
  {
    const Operator apply = [&](const VectorXc &theta) -> VectorXc
    { return op.apply_adjoint(e * op.apply(theta)).cwiseQuotient(weight.cast<Complex>()); };
    const Operator w = [&](const VectorXc &x) -> VectorXc
    { return weight.cast<Complex>().cwiseProduct(x); };
    eig = lanczos_max(apply, w, n, options.lanczos);
  }
  ThetaResult result;
  result.raw = std::sqrt(std::max(eig.value, 0.0));
  result.safety = options.safety;
  result.value = result.raw * options.safety;
  result.maximizer = eig.vector;
  result.residual = eig.residual;
  result.hermitian_defect = eig.hermitian_defect;
  result.dense = eig.dense;
  return result;
}

} // namespace infsup
