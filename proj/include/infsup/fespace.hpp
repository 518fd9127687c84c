// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "infsup/common.hpp"
#include "infsup/mesh.hpp"
#include "infsup/polynomials.hpp"
#include "infsup/problem.hpp"

#include <functional>
#include <vector>

namespace infsup
{

/// Continuous Lagrange space of degree p with zero trace on Dirichlet edges.
/// Global numbering: vertices, then edge nodes (each edge ordered from its
/// lower to its higher vertex id), then interior nodes; constrained nodes are
/// dropped afterwards.
class LagrangeSpace
{
public:
  LagrangeSpace(const Mesh &mesh, int degree);

  int degree() const { return basis_.degree(); }
  Eigen::Index size() const { return size_; }
  const LagrangeBasis &basis() const { return basis_; }
  int local_size() const { return basis_.size(); }

  /// Global index of local node i of element k, or -1 when constrained.
  int dof(int k, int i) const { return dofs_[k][i]; }
  const std::vector<int> &element_dofs(int k) const { return dofs_[k]; }

  /// Gather local coefficients (zero on constrained nodes).
  VectorXc local(int k, const VectorXc &x) const;

private:
  LagrangeBasis basis_;
  std::vector<std::vector<int>> dofs_;
  Eigen::Index size_ = 0;
};

/// Broken P_q space carrying DOFs only on active elements. On element K the
/// basis is the reference orthonormal basis scaled to be L2(K)-orthonormal.
class BrokenSpace
{
public:
  BrokenSpace(const Mesh &mesh, int degree, const std::vector<bool> &active);

  int degree() const { return basis_.degree(); }
  Eigen::Index size() const { return size_; }
  int local_size() const { return basis_.size(); }
  const OrthonormalBasis &basis() const { return basis_; }

  bool active(int k) const { return offsets_[k] >= 0; }
  int offset(int k) const { return offsets_[k]; }
  /// Multiplier turning reference-orthonormal values into L2(K)-orthonormal ones.
  double scale(int k) const { return scales_[k]; }

  VectorXc local(int k, const VectorXc &x) const;

private:
  OrthonormalBasis basis_;
  std::vector<int> offsets_;
  std::vector<double> scales_;
  Eigen::Index size_ = 0;
};

/// Elements with p_K > 0.
std::vector<bool> active_elements(const Mesh &mesh, const ProblemSpec &spec);

/// Values and physical gradients of a Lagrange basis on one element at the
/// points of a reference rule.
struct ElementBasisValues
{
  Eigen::MatrixXd values; // points x basis
  Eigen::MatrixXd dx;
  Eigen::MatrixXd dy;
  Eigen::VectorXd weights; // physical quadrature weights
  std::vector<Point> points; // physical points
};

ElementBasisValues lagrange_values(const Mesh &mesh, int k, const Tabulation &reference,
                                   const TriangleRule &rule);

/// All global matrices of the certification pipeline. Index convention:
/// C(i, j) = beta(phi_i, phi_j), beta linear in its first slot and
/// conjugate-linear in its second.
struct FeSystem
{
  Mesh mesh;
  ProblemSpec spec;
  LagrangeSpace V;
  BrokenSpace Q;

  SparseMatrixc C{};
  SparseMatrixd Mm{};  // (m u, v)
  SparseMatrixd Mp{};  // (p u, v)
  SparseMatrixd KA{};  // (Afrak grad u, grad v)
  SparseMatrixd E{};   // k^2 Mm + KA
  SparseMatrixd G{};   // k^2 (p phi_i, q_m)
  Eigen::VectorXd mq{}; // diagonal of the m-weighted Gram on Q_h
  Eigen::VectorXd pq{}; // diagonal of the p-weighted Gram on Q_h
};

FeSystem assemble(const Mesh &mesh, const ProblemSpec &spec, int threads = 1);

/// Same sesquilinear form assembled from its rearranged expression
/// (u, -k^2 conj(d) v - i k conj(b).grad v) + (grad u, A^H grad v - i k conj(c) v).
SparseMatrixc assemble_beta_rearranged(const Mesh &mesh, const ProblemSpec &spec,
                                       const LagrangeSpace &space);

/// beta(u, v) for u, v in two (possibly different) Lagrange spaces on one mesh.
Complex evaluate_beta(const Mesh &mesh, const ProblemSpec &spec, const LagrangeSpace &su,
                      const VectorXc &u, const LagrangeSpace &sv, const VectorXc &v);

/// k^2 (p w, theta) for w in a Lagrange space and theta in Q_h.
Complex evaluate_coupling(const Mesh &mesh, const ProblemSpec &spec, const LagrangeSpace &sw,
                          const VectorXc &w, const BrokenSpace &sq, const VectorXc &theta);

/// k^2 ||u||_m^2 + ||grad u||_Afrak^2.
double energy_norm_squared(const Mesh &mesh, const ProblemSpec &spec, const LagrangeSpace &space,
                           const VectorXc &u);

/// ||grad u||_Afrak^2.
double afrak_seminorm_squared(const Mesh &mesh, const ProblemSpec &spec, const LagrangeSpace &space,
                              const VectorXc &u);

/// Elementwise L2 projection onto Q_h of a function given per element as
/// f(k, x). Inactive elements are skipped.
using ElementFunction = std::function<Complex(int, const Point &)>;
VectorXc project_pi_h(const Mesh &mesh, const BrokenSpace &space, const ElementFunction &f,
                      int quadrature_degree);

/// Projection of a Lagrange function.
VectorXc project_pi_h(const Mesh &mesh, const BrokenSpace &space, const LagrangeSpace &source,
                      const VectorXc &u);

/// ||u - pi u||_K / (h_K / pi * ||grad u||_K) for the element mean pi u;
/// 0 when grad u vanishes.
double verify_poincare_sample(const Mesh &mesh, int k,
                              const std::function<double(const Point &)> &u,
                              const std::function<Point(const Point &)> &grad,
                              int quadrature_degree = 12);

/// Interpolation of a Lagrange function of `coarse` into `fine`, where `fine`
/// lives on a refinement whose element parents (into the coarse mesh) are
/// given.
SparseMatrixd lagrange_prolongation(const Mesh &coarse_mesh, const LagrangeSpace &coarse,
                                    const Mesh &fine_mesh, const LagrangeSpace &fine,
                                    const std::vector<int> &parent);

/// Map coarse Q_h coefficients to fine Q_h coefficients so that the fine
/// function equals the coarse one (fine degree >= coarse degree).
SparseMatrixd broken_transfer(const Mesh &coarse_mesh, const BrokenSpace &coarse,
                              const Mesh &fine_mesh, const BrokenSpace &fine,
                              const std::vector<int> &parent);

} // namespace infsup
