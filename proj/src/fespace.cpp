// SPDX-License-Identifier: Apache-2.0
#include "infsup/fespace.hpp"

#include <cmath>
#include <numbers>

namespace infsup
{

LagrangeSpace::LagrangeSpace(const Mesh &mesh, int degree) : basis_(degree)
{
  const int p = degree;
  const auto nv = static_cast<int>(mesh.num_vertices());
  const auto ne = static_cast<int>(mesh.edges().size());
  const auto nel = static_cast<int>(mesh.num_elements());
  const int per_edge = p - 1;
  const int per_cell = (p - 1) * (p - 2) / 2;
  const int full = nv + ne * per_edge + nel * per_cell;

  std::vector<bool> constrained(full, false);
  for (int e = 0; e < ne; ++e)
  {
    const Edge &edge = mesh.edges()[e];
    if (edge.tag && *edge.tag == BoundaryTag::Dirichlet)
    {
      constrained[edge.vertices[0]] = true;
      constrained[edge.vertices[1]] = true;
      for (int t = 0; t < per_edge; ++t)
      {
        constrained[nv + e * per_edge + t] = true;
      }
    }
  }
  std::vector<int> compressed(full, -1);
  int next = 0;
  for (int i = 0; i < full; ++i)
  {
    if (!constrained[i])
    {
      compressed[i] = next++;
    }
  }
  size_ = next;

  dofs_.resize(nel);
  for (int k = 0; k < nel; ++k)
  {
    auto &local = dofs_[k];
    local.reserve(basis_.size());
    const auto &verts = mesh.elements()[k].vertices;
    for (int i = 0; i < 3; ++i)
    {
      local.push_back(compressed[verts[i]]);
    }
    for (int i = 0; i < 3; ++i)
    {
      const int e = mesh.element_edge(k, i);
      const bool aligned = mesh.edge_aligned(k, i);
      for (int t = 1; t <= per_edge; ++t)
      {
        const int position = aligned ? t : p - t;
        local.push_back(compressed[nv + e * per_edge + position - 1]);
      }
    }
    for (int j = 0; j < per_cell; ++j)
    {
      local.push_back(compressed[nv + ne * per_edge + k * per_cell + j]);
    }
  }
}

VectorXc LagrangeSpace::local(int k, const VectorXc &x) const
{
  VectorXc out(local_size());
  for (int i = 0; i < local_size(); ++i)
  {
    const int g = dofs_[k][i];
    out(i) = g >= 0 ? x(g) : Complex(0.0);
  }
  return out;
}

BrokenSpace::BrokenSpace(const Mesh &mesh, int degree, const std::vector<bool> &active)
    : basis_(degree)
{
  const auto nel = mesh.num_elements();
  offsets_.assign(nel, -1);
  scales_.resize(nel);
  int next = 0;
  for (std::size_t k = 0; k < nel; ++k)
  {
    scales_[k] = 1.0 / std::sqrt(std::abs(mesh.affine_map(static_cast<int>(k)).det));
    if (active[k])
    {
      offsets_[k] = next;
      next += basis_.size();
    }
  }
  size_ = next;
}

VectorXc BrokenSpace::local(int k, const VectorXc &x) const
{
  if (offsets_[k] < 0)
  {
    return VectorXc::Zero(local_size());
  }
  return x.segment(offsets_[k], local_size());
}

std::vector<bool> active_elements(const Mesh &mesh, const ProblemSpec &spec)
{
  std::vector<bool> active(mesh.num_elements());
  for (std::size_t k = 0; k < mesh.num_elements(); ++k)
  {
    active[k] = spec.weights_of(mesh.elements()[k].region).p > 0.0;
  }
  return active;
}

ElementBasisValues lagrange_values(const Mesh &mesh, int k, const Tabulation &reference,
                                   const TriangleRule &rule)
{
  const AffineMap map = mesh.affine_map(k);
  const Eigen::Matrix2d jit = map.inverse.transpose();
  ElementBasisValues out;
  out.values = reference.values;
  out.dx = jit(0, 0) * reference.dx + jit(0, 1) * reference.dy;
  out.dy = jit(1, 0) * reference.dx + jit(1, 1) * reference.dy;
  const auto nq = static_cast<Eigen::Index>(rule.size());
  out.weights.resize(nq);
  out.points.resize(nq);
  for (Eigen::Index q = 0; q < nq; ++q)
  {
    out.weights(q) = rule.weights[q] * std::abs(map.det);
    out.points[q] = map(rule.points[q]);
  }
  return out;
}

namespace
{

struct LocalMatrices
{
  MatrixXc c;
  Eigen::MatrixXd mm, mp, ka, g;
};

void add_block(std::vector<Eigen::Triplet<double>> &t, const std::vector<int> &rows,
               const std::vector<int> &cols, const Eigen::MatrixXd &block)
{
  for (std::size_t i = 0; i < rows.size(); ++i)
  {
    if (rows[i] < 0)
    {
      continue;
    }
    for (std::size_t j = 0; j < cols.size(); ++j)
    {
      if (cols[j] >= 0)
      {
        t.emplace_back(rows[i], cols[j], block(i, j));
      }
    }
  }
}

} // namespace

FeSystem assemble(const Mesh &mesh, const ProblemSpec &spec, int threads)
{
  const std::vector<bool> active = active_elements(mesh, spec);
  FeSystem sys{mesh, spec, LagrangeSpace(mesh, spec.degree_primal),
               BrokenSpace(mesh, spec.degree_broken, active)};
  const double k = spec.k;
  const double k2 = k * k;
  const Complex ik = I_unit * k;

  const TriangleRule &rule = triangle_rule(2 * spec.degree_primal + 4);
  const Tabulation lag = sys.V.basis().tabulate(rule.points);
  const Tabulation broken = sys.Q.basis().tabulate(rule.points);

  const auto nel = mesh.num_elements();
  std::vector<LocalMatrices> locals(nel);
  parallel_for(nel, threads,
               [&](std::size_t e)
               {
                 const int kk = static_cast<int>(e);
                 const int region = mesh.elements()[e].region;
                 const auto &cf = spec.coefficients_of(region);
                 const auto &w = spec.weights_of(region);
                 const ElementBasisValues ev = lagrange_values(mesh, kk, lag, rule);
                 const auto W = ev.weights.asDiagonal();
                 const Eigen::MatrixXd nn = ev.values.transpose() * W * ev.values;
                 const Eigen::MatrixXd xn = ev.dx.transpose() * W * ev.values;
                 const Eigen::MatrixXd yn = ev.dy.transpose() * W * ev.values;
                 const Eigen::MatrixXd xx = ev.dx.transpose() * W * ev.dx;
                 const Eigen::MatrixXd xy = ev.dx.transpose() * W * ev.dy;
                 const Eigen::MatrixXd yx = ev.dy.transpose() * W * ev.dx;
                 const Eigen::MatrixXd yy = ev.dy.transpose() * W * ev.dy;
                 LocalMatrices &lm = locals[e];
                 lm.c = -k2 * cf.d * nn.cast<Complex>() + ik * cf.c(0) * xn.cast<Complex>() +
                        ik * cf.c(1) * yn.cast<Complex>() +
                        ik * cf.b(0) * xn.transpose().cast<Complex>() +
                        ik * cf.b(1) * yn.transpose().cast<Complex>() +
                        cf.A(0, 0) * xx.cast<Complex>() + cf.A(0, 1) * yx.cast<Complex>() +
                        cf.A(1, 0) * xy.cast<Complex>() + cf.A(1, 1) * yy.cast<Complex>();
                 lm.mm = w.m * nn;
                 lm.mp = w.p * nn;
                 lm.ka = w.afrak(0, 0) * xx + w.afrak(0, 1) * yx + w.afrak(1, 0) * xy +
                         w.afrak(1, 1) * yy;
                 if (active[e])
                 {
                   lm.g = (k2 * w.p * sys.Q.scale(kk)) * ev.values.transpose() * W * broken.values;
                 }
               });

  const Eigen::Index nv = sys.V.size();
  const Eigen::Index nq = sys.Q.size();
  std::vector<Eigen::Triplet<Complex>> tc;
  std::vector<Eigen::Triplet<double>> tm, tp, tk, tg;
  sys.mq.resize(nq);
  sys.pq.resize(nq);
  for (std::size_t e = 0; e < nel; ++e)
  {
    const int kk = static_cast<int>(e);
    const auto &dofs = sys.V.element_dofs(kk);
    const LocalMatrices &lm = locals[e];
    for (std::size_t i = 0; i < dofs.size(); ++i)
    {
      if (dofs[i] < 0)
      {
        continue;
      }
      for (std::size_t j = 0; j < dofs.size(); ++j)
      {
        if (dofs[j] >= 0)
        {
          tc.emplace_back(dofs[i], dofs[j], lm.c(i, j));
        }
      }
    }
    add_block(tm, dofs, dofs, lm.mm);
    add_block(tp, dofs, dofs, lm.mp);
    add_block(tk, dofs, dofs, lm.ka);
    if (sys.Q.active(kk))
    {
      std::vector<int> cols(sys.Q.local_size());
      const auto &w = spec.weights_of(mesh.elements()[e].region);
      for (int m = 0; m < sys.Q.local_size(); ++m)
      {
        cols[m] = sys.Q.offset(kk) + m;
        sys.mq(cols[m]) = w.m;
        sys.pq(cols[m]) = w.p;
      }
      add_block(tg, dofs, cols, lm.g);
    }
  }
  sys.C.resize(nv, nv);
  sys.C.setFromTriplets(tc.begin(), tc.end());
  sys.Mm.resize(nv, nv);
  sys.Mm.setFromTriplets(tm.begin(), tm.end());
  sys.Mp.resize(nv, nv);
  sys.Mp.setFromTriplets(tp.begin(), tp.end());
  sys.KA.resize(nv, nv);
  sys.KA.setFromTriplets(tk.begin(), tk.end());
  sys.E = k2 * sys.Mm + sys.KA;
  sys.G.resize(nv, nq);
  sys.G.setFromTriplets(tg.begin(), tg.end());
  return sys;
}

SparseMatrixc assemble_beta_rearranged(const Mesh &mesh, const ProblemSpec &spec,
                                       const LagrangeSpace &space)
{
  const double k = spec.k;
  const TriangleRule &rule = triangle_rule(2 * space.degree() + 2);
  const Tabulation lag = space.basis().tabulate(rule.points);
  std::vector<Eigen::Triplet<Complex>> t;
  const int n = space.local_size();
  for (std::size_t e = 0; e < mesh.num_elements(); ++e)
  {
    const int kk = static_cast<int>(e);
    const auto &cf = spec.coefficients_of(mesh.elements()[e].region);
    const ElementBasisValues ev = lagrange_values(mesh, kk, lag, rule);
    const auto &dofs = space.element_dofs(kk);
    const Eigen::Matrix2cd ah = cf.A.adjoint();
    for (int i = 0; i < n; ++i)
    {
      for (int j = 0; j < n; ++j)
      {
        if (dofs[i] < 0 || dofs[j] < 0)
        {
          continue;
        }
        Complex sum = 0.0;
        for (Eigen::Index q = 0; q < ev.weights.size(); ++q)
        {
          const Complex u = ev.values(q, i);
          const Eigen::Vector2cd gu(ev.dx(q, i), ev.dy(q, i));
          const Complex v = ev.values(q, j);
          const Eigen::Vector2cd gv(ev.dx(q, j), ev.dy(q, j));
          const Complex s1 = -k * k * std::conj(cf.d) * v -
                             I_unit * k * (std::conj(cf.b(0)) * gv(0) + std::conj(cf.b(1)) * gv(1));
          const Eigen::Vector2cd s2 = ah * gv - I_unit * k * cf.c.conjugate() * v;
          sum += ev.weights(q) * (u * std::conj(s1) + gu(0) * std::conj(s2(0)) +
                                  gu(1) * std::conj(s2(1)));
        }
        t.emplace_back(dofs[i], dofs[j], sum);
      }
    }
  }
  SparseMatrixc c(space.size(), space.size());
  c.setFromTriplets(t.begin(), t.end());
  return c;
}

namespace
{

struct FieldValues
{
  VectorXc value;
  VectorXc dx;
  VectorXc dy;
};

FieldValues field(const ElementBasisValues &ev, const VectorXc &local)
{
  return {ev.values.cast<Complex>() * local, ev.dx.cast<Complex>() * local,
          ev.dy.cast<Complex>() * local};
}

} // namespace

Complex evaluate_beta(const Mesh &mesh, const ProblemSpec &spec, const LagrangeSpace &su,
                      const VectorXc &u, const LagrangeSpace &sv, const VectorXc &v)
{
  const double k = spec.k;
  const Complex ik = I_unit * k;
  const TriangleRule &rule = triangle_rule(su.degree() + sv.degree());
  const Tabulation tu = su.basis().tabulate(rule.points);
  const Tabulation tv = sv.basis().tabulate(rule.points);
  Complex total = 0.0;
  for (std::size_t e = 0; e < mesh.num_elements(); ++e)
  {
    const int kk = static_cast<int>(e);
    const auto &cf = spec.coefficients_of(mesh.elements()[e].region);
    const FieldValues fu = field(lagrange_values(mesh, kk, tu, rule), su.local(kk, u));
    const ElementBasisValues ev = lagrange_values(mesh, kk, tv, rule);
    const FieldValues fv = field(ev, sv.local(kk, v));
    for (Eigen::Index q = 0; q < ev.weights.size(); ++q)
    {
      const Complex a = -k * k * cf.d * fu.value(q) + ik * (cf.c(0) * fu.dx(q) + cf.c(1) * fu.dy(q));
      const Complex f0 = ik * cf.b(0) * fu.value(q) + cf.A(0, 0) * fu.dx(q) + cf.A(0, 1) * fu.dy(q);
      const Complex f1 = ik * cf.b(1) * fu.value(q) + cf.A(1, 0) * fu.dx(q) + cf.A(1, 1) * fu.dy(q);
      total += ev.weights(q) * (a * std::conj(fv.value(q)) + f0 * std::conj(fv.dx(q)) +
                                f1 * std::conj(fv.dy(q)));
    }
  }
  return total;
}

Complex evaluate_coupling(const Mesh &mesh, const ProblemSpec &spec, const LagrangeSpace &sw,
                          const VectorXc &w, const BrokenSpace &sq, const VectorXc &theta)
{
  const TriangleRule &rule = triangle_rule(sw.degree() + sq.degree());
  const Tabulation tw = sw.basis().tabulate(rule.points);
  const Tabulation tq = sq.basis().tabulate(rule.points);
  Complex total = 0.0;
  for (std::size_t e = 0; e < mesh.num_elements(); ++e)
  {
    const int kk = static_cast<int>(e);
    if (!sq.active(kk))
    {
      continue;
    }
    const double p = spec.weights_of(mesh.elements()[e].region).p;
    const ElementBasisValues ev = lagrange_values(mesh, kk, tw, rule);
    const VectorXc wv = ev.values.cast<Complex>() * sw.local(kk, w);
    const VectorXc tv = sq.scale(kk) * (tq.values.cast<Complex>() * sq.local(kk, theta));
    for (Eigen::Index q = 0; q < ev.weights.size(); ++q)
    {
      total += spec.k * spec.k * p * ev.weights(q) * wv(q) * std::conj(tv(q));
    }
  }
  return total;
}

namespace
{

double weighted_norm_squared(const Mesh &mesh, const ProblemSpec &spec, const LagrangeSpace &space,
                             const VectorXc &u, double mass_factor)
{
  const TriangleRule &rule = triangle_rule(2 * space.degree());
  const Tabulation tab = space.basis().tabulate(rule.points);
  double total = 0.0;
  for (std::size_t e = 0; e < mesh.num_elements(); ++e)
  {
    const int kk = static_cast<int>(e);
    const auto &w = spec.weights_of(mesh.elements()[e].region);
    const ElementBasisValues ev = lagrange_values(mesh, kk, tab, rule);
    const FieldValues f = field(ev, space.local(kk, u));
    for (Eigen::Index q = 0; q < ev.weights.size(); ++q)
    {
      const Eigen::Vector2cd g(f.dx(q), f.dy(q));
      total += ev.weights(q) * (mass_factor * spec.k * spec.k * w.m * std::norm(f.value(q)) +
                                g.dot(w.afrak.cast<Complex>() * g).real());
    }
  }
  return total;
}

} // namespace

double energy_norm_squared(const Mesh &mesh, const ProblemSpec &spec, const LagrangeSpace &space,
                           const VectorXc &u)
{
  return weighted_norm_squared(mesh, spec, space, u, 1.0);
}

double afrak_seminorm_squared(const Mesh &mesh, const ProblemSpec &spec, const LagrangeSpace &space,
                              const VectorXc &u)
{
  return weighted_norm_squared(mesh, spec, space, u, 0.0);
}

VectorXc project_pi_h(const Mesh &mesh, const BrokenSpace &space, const ElementFunction &f,
                      int quadrature_degree)
{
  const TriangleRule &rule = triangle_rule(quadrature_degree + space.degree());
  const Tabulation tq = space.basis().tabulate(rule.points);
  VectorXc out = VectorXc::Zero(space.size());
  for (std::size_t e = 0; e < mesh.num_elements(); ++e)
  {
    const int kk = static_cast<int>(e);
    if (!space.active(kk))
    {
      continue;
    }
    const AffineMap map = mesh.affine_map(kk);
    const double jac = std::abs(map.det);
    for (std::size_t q = 0; q < rule.size(); ++q)
    {
      const Complex value = f(kk, map(rule.points[q]));
      for (int m = 0; m < space.local_size(); ++m)
      {
        out(space.offset(kk) + m) += rule.weights[q] * jac * value * space.scale(kk) * tq.values(q, m);
      }
    }
  }
  return out;
}

VectorXc project_pi_h(const Mesh &mesh, const BrokenSpace &space, const LagrangeSpace &source,
                      const VectorXc &u)
{
  const TriangleRule &rule = triangle_rule(source.degree() + space.degree());
  const Tabulation tl = source.basis().tabulate(rule.points);
  const Tabulation tq = space.basis().tabulate(rule.points);
  VectorXc out = VectorXc::Zero(space.size());
  for (std::size_t e = 0; e < mesh.num_elements(); ++e)
  {
    const int kk = static_cast<int>(e);
    if (!space.active(kk))
    {
      continue;
    }
    const double jac = std::abs(mesh.affine_map(kk).det);
    const VectorXc values = tl.values.cast<Complex>() * source.local(kk, u);
    Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(rule.weights.data(),
                                                          static_cast<Eigen::Index>(rule.size()));
    out.segment(space.offset(kk), space.local_size()) =
        (jac * space.scale(kk)) * tq.values.transpose().cast<Complex>() *
        (w.cast<Complex>().asDiagonal() * values);
  }
  return out;
}

double verify_poincare_sample(const Mesh &mesh, int k, const std::function<double(const Point &)> &u,
                              const std::function<Point(const Point &)> &grad,
                              int quadrature_degree)
{
  const TriangleRule &rule = triangle_rule(quadrature_degree);
  const AffineMap map = mesh.affine_map(k);
  const double jac = std::abs(map.det);
  const double area = mesh.area(k);
  double mean = 0.0;
  for (std::size_t q = 0; q < rule.size(); ++q)
  {
    mean += rule.weights[q] * jac * u(map(rule.points[q]));
  }
  mean /= area;
  double err = 0.0, g = 0.0;
  for (std::size_t q = 0; q < rule.size(); ++q)
  {
    const Point x = map(rule.points[q]);
    err += rule.weights[q] * jac * std::pow(u(x) - mean, 2);
    g += rule.weights[q] * jac * grad(x).squaredNorm();
  }
  if (g <= 1e-28 * std::max(1.0, err))
  {
    return 0.0;
  }
  const double h = shape_data(mesh).elements[k].h;
  return std::sqrt(err) / (h / std::numbers::pi * std::sqrt(g));
}

SparseMatrixd lagrange_prolongation(const Mesh &coarse_mesh, const LagrangeSpace &coarse,
                                    const Mesh &fine_mesh, const LagrangeSpace &fine,
                                    const std::vector<int> &parent)
{
  std::vector<bool> done(fine.size(), false);
  std::vector<Eigen::Triplet<double>> t;
  std::vector<Dual> values;
  for (std::size_t e = 0; e < fine_mesh.num_elements(); ++e)
  {
    const int kf = static_cast<int>(e);
    const int kc = parent[e];
    const AffineMap fmap = fine_mesh.affine_map(kf);
    const AffineMap cmap = coarse_mesh.affine_map(kc);
    for (int i = 0; i < fine.local_size(); ++i)
    {
      const int g = fine.dof(kf, i);
      if (g < 0 || done[g])
      {
        continue;
      }
      done[g] = true;
      coarse.basis().evaluate(cmap.to_reference(fmap(fine.basis().node(i))), values);
      for (int j = 0; j < coarse.local_size(); ++j)
      {
        const int gc = coarse.dof(kc, j);
        if (gc >= 0 && std::abs(values[j].v) > 1e-14)
        {
          t.emplace_back(g, gc, values[j].v);
        }
      }
    }
  }
  SparseMatrixd p(fine.size(), coarse.size());
  p.setFromTriplets(t.begin(), t.end());
  return p;
}

SparseMatrixd broken_transfer(const Mesh &coarse_mesh, const BrokenSpace &coarse,
                              const Mesh &fine_mesh, const BrokenSpace &fine,
                              const std::vector<int> &parent)
{
  const TriangleRule &rule = triangle_rule(coarse.degree() + fine.degree());
  const Tabulation tf = fine.basis().tabulate(rule.points);
  std::vector<Eigen::Triplet<double>> t;
  std::vector<Dual> values;
  for (std::size_t e = 0; e < fine_mesh.num_elements(); ++e)
  {
    const int kf = static_cast<int>(e);
    const int kc = parent[e];
    if (!fine.active(kf) || !coarse.active(kc))
    {
      continue;
    }
    const AffineMap fmap = fine_mesh.affine_map(kf);
    const AffineMap cmap = coarse_mesh.affine_map(kc);
    const double jac = std::abs(fmap.det);
    Eigen::MatrixXd block = Eigen::MatrixXd::Zero(fine.local_size(), coarse.local_size());
    for (std::size_t q = 0; q < rule.size(); ++q)
    {
      coarse.basis().evaluate(cmap.to_reference(fmap(rule.points[q])), values);
      for (int m = 0; m < fine.local_size(); ++m)
      {
        for (int n = 0; n < coarse.local_size(); ++n)
        {
          block(m, n) += rule.weights[q] * jac * fine.scale(kf) * tf.values(q, m) *
                         coarse.scale(kc) * values[n].v;
        }
      }
    }
    for (int m = 0; m < fine.local_size(); ++m)
    {
      for (int n = 0; n < coarse.local_size(); ++n)
      {
        if (std::abs(block(m, n)) > 1e-15)
        {
          t.emplace_back(fine.offset(kf) + m, coarse.offset(kc) + n, block(m, n));
        }
      }
    }
  }
  SparseMatrixd p(fine.size(), coarse.size());
  p.setFromTriplets(t.begin(), t.end());
  return p;
}

} // namespace infsup
