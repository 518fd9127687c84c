// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "infsup/fespace.hpp"
#include "infsup/linalg.hpp"

#include <memory>

namespace infsup
{

/// The discrete solution map theta -> u_h with
///   beta(w_h, u_h) = k^2 (p w_h, theta)  for every w_h in V_h.
/// In coefficients: C conj(x) = G conj(theta), i.e. x = conj(C)^{-1} G theta.
class SolutionOperator
{
public:
  explicit SolutionOperator(const FeSystem &system, double tol = 1e-10);

  const FeSystem &system() const { return *system_; }
  double tolerance() const { return tol_; }
  const ComplexLU &lu() const { return *lu_; }

  /// u_h coefficients; throws SingularSystemError when the defining identity
  /// cannot be met to the tolerance.
  VectorXc apply(const VectorXc &theta) const;

  /// Adjoint of apply in the Euclidean coefficient inner products.
  VectorXc apply_adjoint(const VectorXc &y) const;

  /// ||C conj(x) - G conj(theta)|| / ||G conj(theta)||.
  double relative_residual(const VectorXc &theta, const VectorXc &x) const;

private:
  const FeSystem *system_;
  double tol_;
  std::unique_ptr<ComplexLU> lu_;
};

enum class EigenPath
{
  Automatic,
  Dense,
  Iterative
};

struct SpectralOptions
{
  double safety = 1.0 + 1e-6;
  Eigen::Index dense_threshold = 2000;
  EigenPath path = EigenPath::Automatic;
  int threads = 1;
  LanczosOptions lanczos{};
};

struct ThetaResult
{
  double value = 0.0; // certified quantity: sqrt(lambda_max) * safety
  double raw = 0.0;   // sqrt(lambda_max)
  double safety = 1.0;
  VectorXc maximizer;
  double residual = 0.0;
  double hermitian_defect = 0.0;
  bool dense = false;
};

/// max |||u_h(theta)||| subject to k ||theta||_m = 1.
ThetaResult compute_theta(const SolutionOperator &op, const SpectralOptions &options = {});

} // namespace infsup
