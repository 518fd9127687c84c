// SPDX-License-Identifier: Apache-2.0
#include "helpers.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <cmath>

using namespace infsup;
using namespace testing_support;

namespace
{

ProblemSpec laplace_only(int p)
{
  ProblemSpec spec;
  spec.k = 1.7;
  spec.degree_primal = p;
  spec.coefficients[1] = RegionCoefficients{};
  spec.coefficients[1].d = 0.0;
  spec.weights[1] = GardingWeights{};
  return spec;
}

Complex beta_from_matrix(const SparseMatrixc &c, const VectorXc &x, const VectorXc &y)
{
  // beta(u, v) = sum_ij x_i conj(y_j) C_ij
  return (y.adjoint() * (SparseMatrixc(c.transpose()) * x))(0);
}

} // namespace

TEST(Assemble, ReferenceTriangleStiffness)
{
  const Mesh m = reference_triangle(BoundaryTag::Neumann);
  const FeSystem sys = assemble(m, laplace_only(1));
  ASSERT_EQ(sys.V.size(), 3);
  Eigen::Matrix3d expected;
  expected << 1.0, -0.5, -0.5, -0.5, 0.5, 0.0, -0.5, 0.0, 0.5;
  const MatrixXc c = MatrixXc(sys.C);
  // local vertex i carries global dof i on this mesh
  for (int i = 0; i < 3; ++i)
  {
    for (int j = 0; j < 3; ++j)
    {
      EXPECT_NEAR(std::abs(c(sys.V.dof(0, i), sys.V.dof(0, j)) - expected(i, j)), 0.0, 1e-14);
    }
  }
  // P1 mass: int lambda_i lambda_j = A/12 (1 + delta_ij), rows sum to A/3
  const Eigen::MatrixXd mm = Eigen::MatrixXd(sys.Mm);
  for (int i = 0; i < 3; ++i)
  {
    EXPECT_NEAR(mm.row(i).sum(), 0.5 / 3.0, 1e-15);
    EXPECT_NEAR(mm(i, i), 0.5 / 6.0, 1e-15);
  }
}

TEST(Assemble, DirichletRemovesConstrainedDofs)
{
  const Mesh m = reference_triangle(BoundaryTag::Dirichlet);
  EXPECT_EQ(LagrangeSpace(m, 1).size(), 0);
  EXPECT_EQ(LagrangeSpace(m, 3).size(), 1); // one interior node
  const Mesh sq = generate_unit_square(4);
  EXPECT_EQ(LagrangeSpace(sq, 1).size(), 9);
  EXPECT_EQ(LagrangeSpace(sq, 2).size(), 49);
}

TEST(Assemble, RealSymmetricCoefficientsGiveRealSymmetricMatrix)
{
  ProblemSpec spec = helmholtz(7.0, 2);
  spec.coefficients[1].A << 2.0, 0.5, 0.5, 1.0;
  spec.coefficients[1].d = 3.0;
  const FeSystem sys = assemble(generate_unit_square(3, false), spec);
  EXPECT_LT(symmetry_defect(sys.C), 1e-15);
  EXPECT_EQ(MatrixXc(sys.C).imag().norm(), 0.0);
}

TEST(Assemble, SlotConventionMatchesDirectEvaluation)
{
  const Mesh m = generate_unit_square(3, false);
  const ProblemSpec spec = convection_problem(5.0, 2);
  const FeSystem sys = assemble(m, spec);
  std::mt19937_64 rng(7);
  for (int t = 0; t < 5; ++t)
  {
    const VectorXc x = random_complex(sys.V.size(), rng);
    const VectorXc y = random_complex(sys.V.size(), rng);
    const Complex direct = evaluate_beta(m, spec, sys.V, x, sys.V, y);
    EXPECT_LT(std::abs(direct - beta_from_matrix(sys.C, x, y)), 1e-12 * std::abs(direct));
    // linear in the first slot, conjugate-linear in the second
    const Complex s(0.3, -1.1);
    EXPECT_LT(std::abs(evaluate_beta(m, spec, sys.V, VectorXc(s * x), sys.V, y) - s * direct), 1e-11 * std::abs(direct));
    EXPECT_LT(std::abs(evaluate_beta(m, spec, sys.V, x, sys.V, VectorXc(s * y)) - std::conj(s) * direct),
              1e-11 * std::abs(direct));
  }
}

TEST(Assemble, AdjointFormConsistency)
{
  const Mesh m = generate_unit_square(3, false);
  for (int p = 1; p <= 3; ++p)
  {
    const ProblemSpec spec = convection_problem(11.0, p);
    const FeSystem sys = assemble(m, spec);
    const SparseMatrixc rearranged = assemble_beta_rearranged(m, spec, sys.V);
    std::mt19937_64 rng(100 + p);
    for (int t = 0; t < 5; ++t)
    {
      const VectorXc x = random_complex(sys.V.size(), rng);
      const VectorXc y = random_complex(sys.V.size(), rng);
      const Complex a = beta_from_matrix(sys.C, x, y);
      const Complex b = beta_from_matrix(rearranged, x, y);
      EXPECT_LT(std::abs(a - b), 1e-12 * std::abs(a));
    }
  }
}

TEST(Assemble, CouplingMatrixConvention)
{
  const Mesh m = generate_unit_square(2);
  const ProblemSpec spec = helmholtz(4.0, 2, 1);
  const FeSystem sys = assemble(m, spec);
  std::mt19937_64 rng(3);
  const VectorXc w = random_complex(sys.V.size(), rng);
  const VectorXc theta = random_complex(sys.Q.size(), rng);
  const Complex direct = evaluate_coupling(m, spec, sys.V, w, sys.Q, theta);
  const Complex matrix = (theta.adjoint() * (sys.G.cast<Complex>().transpose() * w))(0);
  EXPECT_LT(std::abs(direct - matrix), 1e-12 * std::abs(direct));
}

TEST(Assemble, EnergyGramHermitianPositiveDefinite)
{
  for (int n : {2, 4}) // n = 1 with P1 leaves no free node
  {
    for (int p = 1; p <= 3; ++p)
    {
      const FeSystem sys = assemble(generate_unit_square(n, false), convection_problem(3.0, p));
      const Eigen::MatrixXd e = Eigen::MatrixXd(sys.E);
      EXPECT_LE((e - e.transpose()).norm(), 1e-14 * e.norm());
      EXPECT_GT(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(e).eigenvalues()(0), 0.0);
      EXPECT_LT((Eigen::MatrixXd(sys.E) - (sys.spec.k * sys.spec.k * Eigen::MatrixXd(sys.Mm) + Eigen::MatrixXd(sys.KA))).norm(),
                1e-13 * e.norm());
    }
  }
}

TEST(Assemble, DiscreteGarding)
{
  const Mesh m = generate_unit_square(3, false);
  const ProblemSpec spec = convection_problem(9.0, 2);
  ASSERT_TRUE(garding_check(m, spec).passed);
  const FeSystem sys = assemble(m, spec);
  const double k2 = spec.k * spec.k;
  std::mt19937_64 rng(11);
  for (int t = 0; t < 20; ++t)
  {
    const VectorXc x = random_complex(sys.V.size(), rng);
    const double lhs = beta_from_matrix(sys.C, x, x).real();
    const double energy = (x.adjoint() * sys.E.cast<Complex>() * x)(0).real();
    const double mp = (x.adjoint() * sys.Mp.cast<Complex>() * x)(0).real();
    EXPECT_GE(lhs, energy - 2.0 * k2 * mp - 1e-10 * energy);
  }
}

TEST(Assemble, ConformingInterpolationIntegratesExactly)
{
  // f = x^2 + x y on an all-Neumann square: int |grad f|^2 = 3
  const Mesh m = with_tags(generate_unit_square(3), BoundaryTag::Neumann);
  ProblemSpec spec = helmholtz(1.0, 2);
  const LagrangeSpace v(m, 2);
  double mismatch = 0.0;
  const VectorXc x = interpolate(m, v, [](const Point &p) { return Complex(p.x() * p.x() + p.x() * p.y()); }, &mismatch);
  EXPECT_EQ(mismatch, 0.0);
  EXPECT_NEAR(afrak_seminorm_squared(m, spec, v, x), 3.0, 1e-12);
  // int (x^2 + xy)^2 = 1/5 + 2/8 + 1/9
  EXPECT_NEAR(energy_norm_squared(m, spec, v, x) - 3.0, 1.0 / 5 + 0.25 + 1.0 / 9, 1e-12);
}

TEST(ProjectPi, ConstantsMeansAndIdempotence)
{
  const Mesh tri = reference_triangle(BoundaryTag::Dirichlet);
  const BrokenSpace q0(tri, 0, {true});
  const VectorXc c3 = project_pi_h(tri, q0, [](int, const Point &) { return Complex(3.0); }, 0);
  EXPECT_NEAR(std::abs(broken_value(q0, 0, c3, Point(0.2, 0.2)) - 3.0), 0.0, 1e-14);
  const VectorXc cx = project_pi_h(tri, q0, [](int, const Point &x) { return Complex(x.x()); }, 1);
  EXPECT_NEAR(std::abs(broken_value(q0, 0, cx, Point(0.7, 0.1)) - 1.0 / 3.0), 0.0, 1e-15);

  const Mesh m = generate_unit_square(3);
  const BrokenSpace q2(m, 2, std::vector<bool>(m.num_elements(), true));
  const auto f = [](int, const Point &x) { return Complex(std::sin(3 * x.x()) * x.y(), x.x() * x.x()); };
  const VectorXc once = project_pi_h(m, q2, f, 12);
  const auto back = [&](int k, const Point &x)
  { return broken_value(q2, k, once, m.affine_map(k).to_reference(x)); };
  const VectorXc twice = project_pi_h(m, q2, back, 4);
  EXPECT_LT((once - twice).norm(), 1e-14 * once.norm());
}

TEST(ProjectPi, StableInWeightedNorm)
{
  const Mesh m = generate_unit_square(3);
  const ProblemSpec spec = helmholtz(2.0, 3, 1);
  const FeSystem sys = assemble(m, spec);
  std::mt19937_64 rng(5);
  for (int t = 0; t < 10; ++t)
  {
    const VectorXc x = random_complex(sys.V.size(), rng);
    const VectorXc theta = project_pi_h(m, sys.Q, sys.V, x);
    const double proj = theta.cwiseAbs2().dot(sys.mq);
    const double full = (x.adjoint() * sys.Mm.cast<Complex>() * x)(0).real();
    EXPECT_LE(proj, full * (1 + 1e-13));
  }
}

TEST(ProjectPi, InactiveElementsCarryNoDofs)
{
  const Mesh base = generate_unit_square(2);
  std::vector<Element> els = base.elements();
  els[0].region = 2;
  const Mesh m(base.vertices(), els, base.boundary());
  ProblemSpec spec = helmholtz(3.0, 1);
  spec.coefficients[2] = spec.coefficients[1];
  spec.weights[2] = spec.weights[1];
  spec.weights[2].p = 0.0;
  const auto active = active_elements(m, spec);
  const BrokenSpace q(m, 1, active);
  EXPECT_FALSE(q.active(0));
  EXPECT_EQ(q.size(), 3 * 7);
}

TEST(Poincare, BoundHolds)
{
  const Mesh tri = reference_triangle(BoundaryTag::Dirichlet);
  EXPECT_EQ(verify_poincare_sample(tri, 0, [](const Point &) { return 2.0; }, [](const Point &) { return Point(0, 0); }), 0.0);
  const double lin = verify_poincare_sample(tri, 0, [](const Point &x) { return 3 * x.x() - x.y(); },
                                            [](const Point &) { return Point(3, -1); });
  EXPECT_GT(lin, 0.0);
  EXPECT_LT(lin, 1.0);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> d(-1, 1);
  const Mesh m = generate_unit_square(2);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t)
  {
    double c[6];
    for (double &v : c)
    {
      v = d(rng);
    }
    const auto u = [&](const Point &x)
    { return c[0] + c[1] * x.x() + c[2] * x.y() + c[3] * x.x() * x.x() + c[4] * x.x() * x.y() + c[5] * x.y() * x.y(); };
    const auto g = [&](const Point &x)
    { return Point(c[1] + 2 * c[3] * x.x() + c[4] * x.y(), c[2] + c[4] * x.x() + 2 * c[5] * x.y()); };
    worst = std::max(worst, verify_poincare_sample(m, t % 8, u, g));
  }
  EXPECT_LE(worst, 1.0);
}

TEST(Transfer, ProlongationAndLiftPreserveFunctions)
{
  const Mesh m = generate_unit_square(2, false);
  const ProblemSpec spec = helmholtz(5.0, 2, 1);
  const Refinement r = refine_uniform_tracked(m);
  const FeSystem coarse = assemble(m, spec);
  const FeSystem fine = assemble(r.mesh, spec);
  const SparseMatrixc prolong = lagrange_prolongation(m, coarse.V, r.mesh, fine.V, r.parent).cast<Complex>();
  const SparseMatrixc lift = broken_transfer(m, coarse.Q, r.mesh, fine.Q, r.parent).cast<Complex>();
  std::mt19937_64 rng(2);
  const VectorXc x = random_complex(coarse.V.size(), rng);
  const VectorXc y = random_complex(coarse.V.size(), rng);
  const VectorXc theta = random_complex(coarse.Q.size(), rng);
  const Complex bc = beta_from_matrix(coarse.C, x, y);
  const Complex bf = beta_from_matrix(fine.C, prolong * x, prolong * y);
  EXPECT_LT(std::abs(bc - bf), 1e-12 * std::abs(bc));
  const Complex gc = (theta.adjoint() * (coarse.G.cast<Complex>().transpose() * x))(0);
  const Complex gf = ((lift * theta).adjoint() * (fine.G.cast<Complex>().transpose() * (prolong * x)))(0);
  EXPECT_LT(std::abs(gc - gf), 1e-12 * std::abs(gc));
}
