// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "infsup/certify.hpp"

#include <random>

namespace testing_support
{

using namespace infsup;

inline Mesh with_tags(const Mesh &base, BoundaryTag tag)
{
  std::vector<BoundaryEdge> boundary = base.boundary();
  for (auto &b : boundary)
  {
    b.tag = tag;
  }
  return Mesh(base.vertices(), base.elements(), boundary);
}

inline Mesh reference_triangle(BoundaryTag tag)
{
  return Mesh({Point(0, 0), Point(1, 0), Point(0, 1)}, {Element{{0, 1, 2}, 1}},
              {BoundaryEdge{{0, 1}, tag}, BoundaryEdge{{1, 2}, tag}, BoundaryEdge{{2, 0}, tag}});
}

inline ProblemSpec helmholtz(double k2, int p, int q = 0)
{
  ProblemSpec spec;
  spec.k = std::sqrt(k2);
  spec.degree_primal = p;
  spec.degree_broken = q;
  spec.coefficients[1] = RegionCoefficients{};
  spec.weights[1] = helmholtz_default_weights(spec.coefficients[1]);
  spec.default_weights[1] = true;
  spec.symmetric = true;
  return spec;
}

/// A nonsymmetric problem with all coefficient kinds switched on. The weights
/// pass the pointwise Garding check since b = conj(c) cancels in the Hermitian part.
inline ProblemSpec convection_problem(double k2, int p, int q = 0)
{
  ProblemSpec spec;
  spec.k = std::sqrt(k2);
  spec.degree_primal = p;
  spec.degree_broken = q;
  RegionCoefficients cf;
  cf.A << Complex(1.5, 0.2), Complex(0.3, 0.1), Complex(0.1, 0.1), Complex(1.0, 0.05); // Im A symmetric
  cf.b = Eigen::Vector2cd(Complex(0.4, 0.3), Complex(-0.2, 0.1));
  cf.c = cf.b.conjugate();
  cf.d = Complex(1.2, 0.4);
  spec.coefficients[1] = cf;
  spec.weights[1] = helmholtz_default_weights(cf);
  spec.default_weights[1] = true;
  return spec;
}

inline VectorXc random_complex(Eigen::Index n, std::mt19937_64 &rng)
{
  std::normal_distribution<double> dist;
  VectorXc x(n);
  for (Eigen::Index i = 0; i < n; ++i)
  {
    const double re = dist(rng);
    x(i) = Complex(re, dist(rng));
  }
  return x;
}

/// Value of a broken Q_h function at the reference point xi of element k.
inline Complex broken_value(const BrokenSpace &q, int k, const VectorXc &theta, const Point &xi)
{
  const Tabulation t = q.basis().tabulate({xi});
  return q.scale(k) * (t.values.row(0).cast<Complex>() * q.local(k, theta))(0);
}

/// Coefficients of a function interpolated at the Lagrange nodes. Checks that
/// shared nodes agree between elements (a conformity check of the DOF map).
template <class F> VectorXc interpolate(const Mesh &mesh, const LagrangeSpace &space, F &&f, double *mismatch = nullptr)
{
  VectorXc x = VectorXc::Zero(space.size());
  std::vector<bool> set(space.size(), false);
  double worst = 0.0;
  for (std::size_t e = 0; e < mesh.num_elements(); ++e)
  {
    const int k = static_cast<int>(e);
    const AffineMap map = mesh.affine_map(k);
    for (int i = 0; i < space.local_size(); ++i)
    {
      const int g = space.dof(k, i);
      if (g < 0)
      {
        continue;
      }
      const Complex v = f(map(space.basis().node(i)));
      if (set[g])
      {
        worst = std::max(worst, std::abs(v - x(g)));
      }
      x(g) = v;
      set[g] = true;
    }
  }
  if (mismatch != nullptr)
  {
    *mismatch = worst;
  }
  return x;
}

} // namespace testing_support
