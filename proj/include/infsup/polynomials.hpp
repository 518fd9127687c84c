// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "infsup/common.hpp"

#include <array>
#include <vector>

namespace infsup
{

// ---------------------------------------------------------------------------
// Quadrature

/// Gauss-Legendre rule on [0, 1].
struct LineRule
{
  std::vector<double> points;
  std::vector<double> weights;
};

/// Rule on the reference triangle (0,0), (1,0), (0,1); weights sum to 1/2.
struct TriangleRule
{
  std::vector<Point> points;
  std::vector<double> weights;
  std::size_t size() const { return points.size(); }
};

/// Exact for polynomials of degree <= `degree`. Cached; references stay valid.
const LineRule &line_rule(int degree);
const TriangleRule &triangle_rule(int degree);

// ---------------------------------------------------------------------------
// Forward-mode derivative in the two reference coordinates.

struct Dual
{
  double v = 0.0;
  double dx = 0.0;
  double dy = 0.0;

  static Dual x(double value) { return {value, 1.0, 0.0}; }
  static Dual y(double value) { return {value, 0.0, 1.0}; }
  static Dual constant(double value) { return {value, 0.0, 0.0}; }
};

inline Dual operator+(Dual a, Dual b) { return {a.v + b.v, a.dx + b.dx, a.dy + b.dy}; }
inline Dual operator-(Dual a, Dual b) { return {a.v - b.v, a.dx - b.dx, a.dy - b.dy}; }
inline Dual operator*(Dual a, Dual b)
{
  return {a.v * b.v, a.dx * b.v + a.v * b.dx, a.dy * b.v + a.v * b.dy};
}
inline Dual operator*(double s, Dual a) { return {s * a.v, s * a.dx, s * a.dy}; }
inline Dual operator+(Dual a, double s) { return {a.v + s, a.dx, a.dy}; }

// ---------------------------------------------------------------------------
// Scalar bases on the reference triangle

inline int dim_p(int degree) { return degree < 0 ? 0 : (degree + 1) * (degree + 2) / 2; }

/// Values and reference gradients of a basis at a set of points
/// (rows = points, columns = basis functions).
struct Tabulation
{
  Eigen::MatrixXd values;
  Eigen::MatrixXd dx;
  Eigen::MatrixXd dy;
};

/// L2(reference triangle)-orthonormal Dubiner basis of P_n, ordered by total
/// degree. Built from Legendre/Jacobi recurrences in a division-free form.
class OrthonormalBasis
{
public:
  explicit OrthonormalBasis(int degree);

  int degree() const { return degree_; }
  int size() const { return dim_p(degree_); }

  void evaluate(const Point &xi, std::vector<Dual> &out) const;
  Tabulation tabulate(const std::vector<Point> &points) const;

  /// Index of the first function of total degree d.
  static int first_of_degree(int d) { return dim_p(d - 1); }

private:
  int degree_;
  std::vector<double> scale_;
};

/// Shifted Legendre polynomials on [0, 1], degrees 0..n.
std::vector<double> legendre01(int n, double t);

/// Nodal Lagrange basis of degree p on the equispaced lattice.
/// Local ordering: the three vertices, then the p-1 nodes of each edge i
/// (opposite vertex i, running from vertex i+1 to vertex i+2), then interior
/// nodes.
class LagrangeBasis
{
public:
  explicit LagrangeBasis(int degree);

  int degree() const { return degree_; }
  int size() const { return dim_p(degree_); }
  const std::vector<std::array<int, 3>> &lattice() const { return lattice_; }
  Point node(int i) const;

  void evaluate(const Point &xi, std::vector<Dual> &out) const;
  Tabulation tabulate(const std::vector<Point> &points) const;

private:
  int degree_;
  std::vector<std::array<int, 3>> lattice_; // barycentric multi-indices
};

// ---------------------------------------------------------------------------
// Raviart-Thomas element on the reference triangle

/// RT_r = P_r^2 + x P_r. Degrees of freedom: normal moments against shifted
/// Legendre polynomials on each edge (edge i opposite vertex i, traversed
/// counter-clockwise, unnormalised outward normal), then interior moments
/// against the orthonormal P_{r-1}^2 basis.
class RaviartThomasElement
{
public:
  explicit RaviartThomasElement(int order);

  int order() const { return order_; }
  int size() const { return (order_ + 1) * (order_ + 3); }
  int edge_dofs() const { return order_ + 1; }
  int interior_dofs() const { return order_ * (order_ + 1); }

  struct Table
  {
    Eigen::MatrixXd vx;  // points x basis
    Eigen::MatrixXd vy;
    Eigen::MatrixXd div; // reference divergence
  };
  Table tabulate(const std::vector<Point> &points) const;

  /// Normal moments of the basis for inspection (identity up to rounding).
  Eigen::MatrixXd dof_matrix() const;

  double conditioning() const { return conditioning_; }

private:
  void evaluate_spanning(const Point &xi, Eigen::Ref<Eigen::VectorXd> vx,
                         Eigen::Ref<Eigen::VectorXd> vy, Eigen::Ref<Eigen::VectorXd> div) const;
  Eigen::MatrixXd spanning_dofs() const;

  int order_;
  OrthonormalBasis span_basis_;
  Eigen::MatrixXd coefficients_; // spanning -> nodal
  double conditioning_ = 0.0;
};

/// Reference edge i as (start, end) points, counter-clockwise.
std::array<Point, 2> reference_edge(int i);

} // namespace infsup
