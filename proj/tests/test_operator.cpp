// SPDX-License-Identifier: Apache-2.0
#include "helpers.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace infsup;
using namespace testing_support;

namespace
{

double energy(const FeSystem &sys, const VectorXc &x)
{
  return std::sqrt((x.adjoint() * sys.E.cast<Complex>() * x)(0).real());
}

double m_norm(const FeSystem &sys, const VectorXc &theta)
{
  return sys.spec.k * std::sqrt(theta.cwiseAbs2().dot(sys.mq));
}

} // namespace

TEST(SolutionOperator, ZeroAndLinearity)
{
  const FeSystem sys = assemble(generate_unit_square(4, false), convection_problem(8.0, 2, 1));
  const SolutionOperator op(sys);
  EXPECT_EQ(op.apply(VectorXc::Zero(sys.Q.size())).norm(), 0.0);
  std::mt19937_64 rng(1);
  const VectorXc a = random_complex(sys.Q.size(), rng);
  const VectorXc b = random_complex(sys.Q.size(), rng);
  const Complex s(2.0, -0.5);
  const VectorXc lhs = op.apply(a + s * b);
  const VectorXc rhs = op.apply(a) + s * op.apply(b);
  EXPECT_LT((lhs - rhs).norm(), 1e-10 * lhs.norm());
}

TEST(SolutionOperator, DefiningIdentityHoldsForEveryTestFunction)
{
  const Mesh m = generate_unit_square(3, false);
  const ProblemSpec spec = convection_problem(6.0, 2, 1);
  const FeSystem sys = assemble(m, spec);
  const SolutionOperator op(sys);
  std::mt19937_64 rng(2);
  const VectorXc theta = random_complex(sys.Q.size(), rng);
  const VectorXc u = op.apply(theta);
  EXPECT_LE(op.relative_residual(theta, u), 1e-10);
  // beta(w, P_h theta) = k^2 (p w, theta), checked by direct quadrature for random w
  for (int t = 0; t < 5; ++t)
  {
    const VectorXc w = random_complex(sys.V.size(), rng);
    const Complex lhs = evaluate_beta(m, spec, sys.V, w, sys.V, u);
    const Complex rhs = evaluate_coupling(m, spec, sys.V, w, sys.Q, theta);
    EXPECT_LT(std::abs(lhs - rhs), 1e-10 * std::abs(rhs));
  }
}

TEST(SolutionOperator, AdjointIsConsistent)
{
  const FeSystem sys = assemble(generate_unit_square(3), convection_problem(4.0, 2, 1));
  const SolutionOperator op(sys);
  std::mt19937_64 rng(3);
  const VectorXc theta = random_complex(sys.Q.size(), rng);
  const VectorXc y = random_complex(sys.V.size(), rng);
  const Complex a = y.dot(op.apply(theta));
  const Complex b = op.apply_adjoint(y).dot(theta);
  EXPECT_LT(std::abs(a - b), 1e-11 * std::abs(a));
}

TEST(SolutionOperator, SingularSystemIsReported)
{
  ProblemSpec spec = helmholtz(1.0, 1);
  spec.coefficients[1].A.setZero();
  spec.coefficients[1].d = 0.0;
  const FeSystem sys = assemble(generate_unit_square(2), spec);
  try
  {
    const SolutionOperator op(sys);
    (void)op.apply(VectorXc::Ones(sys.Q.size()));
    FAIL() << "expected a singular-system error";
  }
  catch (const SingularSystemError &e)
  {
    EXPECT_NE(std::string(e.what()).find("not invertible on this mesh"), std::string::npos);
  }
}

TEST(Theta, BoundsEverySolution)
{
  const FeSystem sys = assemble(generate_unit_square(4), helmholtz(10.0, 2));
  const SolutionOperator op(sys);
  const ThetaResult theta = compute_theta(op);
  EXPECT_NEAR(theta.value, theta.raw * (1 + 1e-6), 1e-15 * theta.value);
  std::mt19937_64 rng(4);
  for (int t = 0; t < 20; ++t)
  {
    const VectorXc th = random_complex(sys.Q.size(), rng);
    EXPECT_LE(energy(sys, op.apply(th)), theta.raw * m_norm(sys, th) * (1 + 1e-12));
  }
  // the maximiser attains it
  EXPECT_NEAR(energy(sys, op.apply(theta.maximizer)) / m_norm(sys, theta.maximizer), theta.raw, 1e-9 * theta.raw);
  EXPECT_LE(theta.hermitian_defect, 1e-12);
}

TEST(Theta, SymmetricCoerciveCaseAtMostOne)
{
  ProblemSpec spec = helmholtz(10.0, 2);
  spec.coefficients[1].d = -1.0; // beta = k^2 (u, v) + (grad u, grad v)
  spec.weights[1] = GardingWeights{};
  spec.default_weights[1] = false;
  for (int n : {2, 4, 8})
  {
    const FeSystem sys = assemble(generate_unit_square(n, n == 4), spec);
    const SolutionOperator op(sys);
    EXPECT_LE(compute_theta(op).raw, 1.0 + 1e-8) << "n = " << n;
  }
}

TEST(Theta, SingleActiveElement)
{
  const Mesh base = generate_unit_square(2);
  std::vector<Element> els = base.elements();
  for (std::size_t e = 1; e < els.size(); ++e)
  {
    els[e].region = 2;
  }
  const Mesh m(base.vertices(), els, base.boundary());
  ProblemSpec spec = helmholtz(3.0, 2);
  spec.coefficients[2] = spec.coefficients[1];
  spec.weights[2] = spec.weights[1];
  spec.weights[2].p = 0.0;
  const FeSystem sys = assemble(m, spec);
  ASSERT_EQ(sys.Q.size(), 1);
  const SolutionOperator op(sys);
  const VectorXc unit = VectorXc::Ones(1);
  EXPECT_NEAR(compute_theta(op).raw, energy(sys, op.apply(unit)) / m_norm(sys, unit), 1e-13);
}

TEST(Theta, GrowsTowardResonance)
{
  const Mesh m = generate_unit_square(8);
  double previous = 0.0;
  for (double k2 : {10.0, 15.0, 18.0, 19.5})
  {
    const FeSystem sys = assemble(m, helmholtz(k2, 2));
    const double value = compute_theta(SolutionOperator(sys)).raw;
    EXPECT_GT(value, previous) << "k^2 = " << k2;
    previous = value;
  }
}

TEST(Theta, DenseAndIterativePathsAgree)
{
  for (const ProblemSpec &spec : {helmholtz(12.0, 2, 1), convection_problem(7.0, 1, 0)})
  {
    const FeSystem sys = assemble(generate_unit_square(6, false), spec);
    const SolutionOperator op(sys);
    SpectralOptions dense;
    dense.path = EigenPath::Dense;
    SpectralOptions iterative;
    iterative.path = EigenPath::Iterative;
    const ThetaResult a = compute_theta(op, dense);
    const ThetaResult b = compute_theta(op, iterative);
    EXPECT_TRUE(a.dense);
    EXPECT_FALSE(b.dense);
    EXPECT_NEAR(a.raw, b.raw, 1e-8 * a.raw);
  }
}

TEST(Theta, ThreadCountDoesNotChangeResult)
{
  const FeSystem sys = assemble(generate_unit_square(5), helmholtz(9.0, 2));
  const SolutionOperator op(sys);
  SpectralOptions one;
  SpectralOptions four;
  four.threads = 4;
  EXPECT_NEAR(compute_theta(op, one).raw, compute_theta(op, four).raw, 1e-12 * compute_theta(op, one).raw);
}

TEST(Lanczos, MatchesDenseOnRandomPencil)
{
  std::mt19937_64 rng(9);
  const int n = 60;
  MatrixXc x(n, n);
  for (int j = 0; j < n; ++j)
  {
    x.col(j) = random_complex(n, rng);
  }
  const MatrixXc a = x.adjoint() * x;
  Eigen::VectorXd b(n);
  for (int i = 0; i < n; ++i)
  {
    b(i) = 1.0 + 0.5 * std::sin(i);
  }
  const EigenResult dense = dense_pencil_max(a, b);
  const Operator op = [&](const VectorXc &v) -> VectorXc { return (a * v).cwiseQuotient(b.cast<Complex>()); };
  const Operator w = [&](const VectorXc &v) -> VectorXc { return b.cast<Complex>().cwiseProduct(v); };
  const EigenResult it = lanczos_max(op, w, n);
  EXPECT_NEAR(dense.value, it.value, 1e-10 * dense.value);
  // not Hermitian -> rejected
  MatrixXc bad = a;
  bad(0, 1) += 1.0;
  EXPECT_THROW(dense_pencil_max(bad, b), Error);
}

TEST(Lanczos, ClusteredTopReturnsLowerEstimateOnRequest)
{
  // eigenvalues accumulating at 1: the residual criterion cannot be met in 100 steps
  const int n = 3000;
  Eigen::VectorXd diag(n);
  for (int i = 0; i < n; ++i)
  {
    diag(i) = 1.0 - 1.0 / (1.0 + i);
  }
  const Operator op = [&](const VectorXc &v) -> VectorXc { return diag.cast<Complex>().cwiseProduct(v); };
  const Operator w = [](const VectorXc &v) -> VectorXc { return v; };
  LanczosOptions strict;
  strict.max_iterations = 100;
  EXPECT_THROW(lanczos_max(op, w, n, strict), ConvergenceError);
  LanczosOptions loose = strict;
  loose.allow_unconverged = true;
  const EigenResult r = lanczos_max(op, w, n, loose);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.iterations, 100);
  EXPECT_LE(r.value, diag.maxCoeff() * (1 + 1e-14));
  EXPECT_NEAR(r.value, diag.maxCoeff(), 1e-3);
}
