// SPDX-License-Identifier: Apache-2.0
#include "infsup/polynomials.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

namespace infsup
{

namespace
{

LineRule make_gauss_legendre(int n)
{
  LineRule rule;
  rule.points.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i)
  {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it)
    {
      double p0 = 1.0, p1 = x;
      for (int m = 2; m <= n; ++m)
      {
        const double p2 = ((2.0 * m - 1.0) * x * p1 - (m - 1.0) * p0) / m;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1)
      {
        p1 = x;
        p0 = 1.0;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16)
      {
        break;
      }
    }
    double p0 = 1.0, p1 = x;
    for (int m = 2; m <= n; ++m)
    {
      const double p2 = ((2.0 * m - 1.0) * x * p1 - (m - 1.0) * p0) / m;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    rule.points[i] = 0.5 * (1.0 - x);
    rule.weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

template <typename Rule, typename Make>
const Rule &cached(int degree, Make make)
{
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<Rule>> cache;
  std::lock_guard lock(mutex);
  auto &slot = cache[degree];
  if (!slot)
  {
    slot = std::make_unique<Rule>(make(degree));
  }
  return *slot;
}

} // namespace

const LineRule &line_rule(int degree)
{
  return cached<LineRule>(std::max(degree, 0),
                          [](int d) { return make_gauss_legendre(d / 2 + 1); });
}

const TriangleRule &triangle_rule(int degree)
{
  return cached<TriangleRule>(std::max(degree, 0),
                              [](int d)
                              {
                                const LineRule g = make_gauss_legendre((d + 3) / 2);
                                TriangleRule rule;
                                for (std::size_t i = 0; i < g.points.size(); ++i)
                                {
                                  for (std::size_t j = 0; j < g.points.size(); ++j)
                                  {
                                    const double u = g.points[i];
                                    const double v = g.points[j];
                                    rule.points.emplace_back(u, v * (1.0 - u));
                                    rule.weights.push_back(g.weights[i] * g.weights[j] * (1.0 - u));
                                  }
                                }
                                return rule;
                              });
}

// ---------------------------------------------------------------------------

namespace
{

void dubiner_raw(int n, const Point &xi, std::vector<Dual> &out)
{
  const Dual x = Dual::x(xi.x());
  const Dual y = Dual::y(xi.y());
  const Dual s = 2.0 * x + y + (-1.0); // collapsed-coordinate numerator
  const Dual t = Dual::constant(1.0) - y;
  const Dual b = 2.0 * y + (-1.0);

  std::vector<Dual> q(n + 1);
  q[0] = Dual::constant(1.0);
  if (n >= 1)
  {
    q[1] = s;
  }
  for (int m = 1; m < n; ++m)
  {
    q[m + 1] = (1.0 / (m + 1)) * ((2.0 * m + 1.0) * (s * q[m]) - static_cast<double>(m) * (t * t * q[m - 1]));
  }

  out.assign(dim_p(n), Dual{});
  std::vector<Dual> jac(n + 1);
  for (int i = 0; i <= n; ++i)
  {
    const double a = 2.0 * i + 1.0;
    const int jmax = n - i;
    jac[0] = Dual::constant(1.0);
    if (jmax >= 1)
    {
      jac[1] = Dual::constant(a + 1.0) + (0.5 * (a + 2.0)) * (b + (-1.0));
    }
    for (int m = 2; m <= jmax; ++m)
    {
      const double c1 = 2.0 * m * (m + a) * (2.0 * m + a - 2.0);
      const double c2a = (2.0 * m + a - 1.0) * (2.0 * m + a) * (2.0 * m + a - 2.0);
      const double c2b = (2.0 * m + a - 1.0) * a * a;
      const double c3 = 2.0 * (m + a - 1.0) * (m - 1.0) * (2.0 * m + a);
      jac[m] = (1.0 / c1) * (c2a * (b * jac[m - 1]) + c2b * jac[m - 1] - c3 * jac[m - 2]);
    }
    for (int j = 0; j <= jmax; ++j)
    {
      const int d = i + j;
      out[OrthonormalBasis::first_of_degree(d) + j] = q[i] * jac[j];
    }
  }
}

} // namespace

OrthonormalBasis::OrthonormalBasis(int degree) : degree_(degree)
{
  if (degree < 0)
  {
    throw Error("orthonormal basis degree must be non-negative");
  }
  const TriangleRule &rule = triangle_rule(2 * degree);
  std::vector<double> norms(dim_p(degree), 0.0);
  std::vector<Dual> vals;
  for (std::size_t q = 0; q < rule.size(); ++q)
  {
    dubiner_raw(degree, rule.points[q], vals);
    for (int i = 0; i < size(); ++i)
    {
      norms[i] += rule.weights[q] * vals[i].v * vals[i].v;
    }
  }
  scale_.resize(norms.size());
  for (std::size_t i = 0; i < norms.size(); ++i)
  {
    scale_[i] = 1.0 / std::sqrt(norms[i]);
  }
}

void OrthonormalBasis::evaluate(const Point &xi, std::vector<Dual> &out) const
{
  dubiner_raw(degree_, xi, out);
  for (std::size_t i = 0; i < out.size(); ++i)
  {
    out[i] = scale_[i] * out[i];
  }
}

Tabulation OrthonormalBasis::tabulate(const std::vector<Point> &points) const
{
  Tabulation tab;
  const auto n = static_cast<Eigen::Index>(points.size());
  tab.values.resize(n, size());
  tab.dx.resize(n, size());
  tab.dy.resize(n, size());
  std::vector<Dual> vals;
  for (Eigen::Index q = 0; q < n; ++q)
  {
    evaluate(points[q], vals);
    for (int i = 0; i < size(); ++i)
    {
      tab.values(q, i) = vals[i].v;
      tab.dx(q, i) = vals[i].dx;
      tab.dy(q, i) = vals[i].dy;
    }
  }
  return tab;
}

std::vector<double> legendre01(int n, double t)
{
  std::vector<double> out(n + 1);
  const double x = 2.0 * t - 1.0;
  out[0] = 1.0;
  if (n >= 1)
  {
    out[1] = x;
  }
  for (int m = 1; m < n; ++m)
  {
    out[m + 1] = ((2.0 * m + 1.0) * x * out[m] - m * out[m - 1]) / (m + 1.0);
  }
  return out;
}

// ---------------------------------------------------------------------------

LagrangeBasis::LagrangeBasis(int degree) : degree_(degree)
{
  if (degree < 1)
  {
    throw Error("Lagrange degree must be at least 1");
  }
  const int p = degree;
  for (int i = 0; i < 3; ++i)
  {
    std::array<int, 3> a{0, 0, 0};
    a[i] = p;
    lattice_.push_back(a);
  }
  for (int i = 0; i < 3; ++i)
  {
    const int s = (i + 1) % 3;
    const int e = (i + 2) % 3;
    for (int t = 1; t < p; ++t)
    {
      std::array<int, 3> a{0, 0, 0};
      a[s] = p - t;
      a[e] = t;
      lattice_.push_back(a);
    }
  }
  for (int a1 = 1; a1 <= p - 2; ++a1)
  {
    for (int a2 = 1; a2 <= p - 1 - a1; ++a2)
    {
      lattice_.push_back({p - a1 - a2, a1, a2});
    }
  }
}

Point LagrangeBasis::node(int i) const
{
  return Point(static_cast<double>(lattice_[i][1]) / degree_,
               static_cast<double>(lattice_[i][2]) / degree_);
}

void LagrangeBasis::evaluate(const Point &xi, std::vector<Dual> &out) const
{
  const std::array<Dual, 3> lambda{Dual{1.0 - xi.x() - xi.y(), -1.0, -1.0}, Dual::x(xi.x()),
                                   Dual::y(xi.y())};
  out.resize(lattice_.size());
  for (std::size_t n = 0; n < lattice_.size(); ++n)
  {
    Dual value = Dual::constant(1.0);
    for (int k = 0; k < 3; ++k)
    {
      for (int l = 0; l < lattice_[n][k]; ++l)
      {
        value = value * ((1.0 / (l + 1.0)) * (static_cast<double>(degree_) * lambda[k] + (-static_cast<double>(l))));
      }
    }
    out[n] = value;
  }
}

Tabulation LagrangeBasis::tabulate(const std::vector<Point> &points) const
{
  Tabulation tab;
  const auto n = static_cast<Eigen::Index>(points.size());
  tab.values.resize(n, size());
  tab.dx.resize(n, size());
  tab.dy.resize(n, size());
  std::vector<Dual> vals;
  for (Eigen::Index q = 0; q < n; ++q)
  {
    evaluate(points[q], vals);
    for (int i = 0; i < size(); ++i)
    {
      tab.values(q, i) = vals[i].v;
      tab.dx(q, i) = vals[i].dx;
      tab.dy(q, i) = vals[i].dy;
    }
  }
  return tab;
}

// ---------------------------------------------------------------------------

std::array<Point, 2> reference_edge(int i)
{
  static const std::array<Point, 3> v{Point(0.0, 0.0), Point(1.0, 0.0), Point(0.0, 1.0)};
  return {v[(i + 1) % 3], v[(i + 2) % 3]};
}

RaviartThomasElement::RaviartThomasElement(int order) : order_(order), span_basis_(order)
{
  if (order < 0)
  {
    throw Error("Raviart-Thomas order must be non-negative");
  }
  const Eigen::MatrixXd dofs = spanning_dofs();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(dofs);
  conditioning_ = svd.singularValues()(0) / svd.singularValues()(svd.singularValues().size() - 1);
  coefficients_ = dofs.fullPivLu().inverse();
}

void RaviartThomasElement::evaluate_spanning(const Point &xi, Eigen::Ref<Eigen::VectorXd> vx,
                                             Eigen::Ref<Eigen::VectorXd> vy,
                                             Eigen::Ref<Eigen::VectorXd> div) const
{
  std::vector<Dual> psi;
  span_basis_.evaluate(xi, psi);
  const int np = span_basis_.size();
  for (int m = 0; m < np; ++m)
  {
    vx(2 * m) = psi[m].v;
    vy(2 * m) = 0.0;
    div(2 * m) = psi[m].dx;
    vx(2 * m + 1) = 0.0;
    vy(2 * m + 1) = psi[m].v;
    div(2 * m + 1) = psi[m].dy;
  }
  int s = 2 * np;
  for (int m = OrthonormalBasis::first_of_degree(order_); m < np; ++m, ++s)
  {
    vx(s) = xi.x() * psi[m].v;
    vy(s) = xi.y() * psi[m].v;
    div(s) = 2.0 * psi[m].v + xi.x() * psi[m].dx + xi.y() * psi[m].dy;
  }
}

Eigen::MatrixXd RaviartThomasElement::spanning_dofs() const
{
  const int n = size();
  const int r = order_;
  Eigen::MatrixXd dofs = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd vx(n), vy(n), dv(n);

  const LineRule &line = line_rule(2 * r + 2);
  for (int e = 0; e < 3; ++e)
  {
    const auto [a, b] = reference_edge(e);
    const Point t = b - a;
    const Point normal(t.y(), -t.x());
    for (std::size_t q = 0; q < line.points.size(); ++q)
    {
      const Point x = a + line.points[q] * t;
      evaluate_spanning(x, vx, vy, dv);
      const auto leg = legendre01(r, line.points[q]);
      for (int j = 0; j <= r; ++j)
      {
        dofs.row(e * (r + 1) + j) += line.weights[q] * leg[j] * (normal.x() * vx + normal.y() * vy).transpose();
      }
    }
  }

  const TriangleRule &tri = triangle_rule(2 * r + 2);
  std::vector<Dual> psi;
  const int offset = 3 * (r + 1);
  const int ninterior = dim_p(r - 1);
  for (std::size_t q = 0; q < tri.size(); ++q)
  {
    evaluate_spanning(tri.points[q], vx, vy, dv);
    span_basis_.evaluate(tri.points[q], psi);
    for (int m = 0; m < ninterior; ++m)
    {
      dofs.row(offset + 2 * m) += tri.weights[q] * psi[m].v * vx.transpose();
      dofs.row(offset + 2 * m + 1) += tri.weights[q] * psi[m].v * vy.transpose();
    }
  }
  return dofs;
}

RaviartThomasElement::Table RaviartThomasElement::tabulate(const std::vector<Point> &points) const
{
  const int n = size();
  const auto np = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd sx(np, n), sy(np, n), sd(np, n);
  Eigen::VectorXd vx(n), vy(n), dv(n);
  for (Eigen::Index q = 0; q < np; ++q)
  {
    evaluate_spanning(points[q], vx, vy, dv);
    sx.row(q) = vx.transpose();
    sy.row(q) = vy.transpose();
    sd.row(q) = dv.transpose();
  }
  return Table{sx * coefficients_, sy * coefficients_, sd * coefficients_};
}

Eigen::MatrixXd RaviartThomasElement::dof_matrix() const
{
  return spanning_dofs() * coefficients_;
}

} // namespace infsup
