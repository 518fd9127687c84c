// SPDX-License-Identifier: Apache-2.0
#include "infsup/equilibrate.hpp"

#include <cmath>
#include <algorithm>
#include <cstdio>
#include <limits>
#include <ostream>

namespace infsup
{

namespace
{

const std::array<Point, 3> reference_lambda_gradients{Point(-1.0, -1.0), Point(1.0, 0.0),
                                                      Point(0.0, 1.0)};

double reference_lambda(int j, const Point &xi)
{
  return j == 0 ? 1.0 - xi.x() - xi.y() : (j == 1 ? xi.x() : xi.y());
}

Eigen::Matrix2d inverse_sqrt(const Eigen::Matrix2d &a)
{
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(a);
  return es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
         es.eigenvectors().transpose();
}

int local_vertex(const Mesh &mesh, int k, int vertex)
{
  const auto &vs = mesh.elements()[k].vertices;
  for (int i = 0; i < 3; ++i)
  {
    if (vs[i] == vertex)
    {
      return i;
    }
  }
  throw Error("vertex " + std::to_string(vertex + 1) + " is not a vertex of element " +
              std::to_string(k + 1));
}

// rows of a 2n-vector split into x and y halves, mixed by a 2x2 matrix
template <typename M>
M mix_components(const Eigen::Matrix2d &s, const M &in, Eigen::Index n)
{
  M out(in.rows(), in.cols());
  out.topRows(n) = s(0, 0) * in.topRows(n) + s(0, 1) * in.bottomRows(n);
  out.bottomRows(n) = s(1, 0) * in.topRows(n) + s(1, 1) * in.bottomRows(n);
  return out;
}

} // namespace

Complex PatchData::mean(const Mesh &mesh) const
{
  Complex total = 0.0;
  for (std::size_t i = 0; i < elements.size(); ++i)
  {
    total += divergence[i](0) * std::sqrt(mesh.area(elements[i]));
  }
  return total;
}

double PatchData::divergence_norm() const
{
  double total = 0.0;
  for (const auto &d : divergence)
  {
    total += d.squaredNorm();
  }
  return std::sqrt(total);
}

// ---------------------------------------------------------------------------

struct Equilibrator::Impl
{
  const FeSystem *sys = nullptr;
  int p = 1;
  int r = 3;
  RaviartThomasElement rt;
  const TriangleRule *rule = nullptr;
  RaviartThomasElement::Table rt_tab;
  Tabulation div_tab;    // P_r orthonormal: divergence data and multipliers
  Tabulation target_tab; // P_{p+1}
  Tabulation res_tab;    // P_{r+1}
  Tabulation lag_tab;
  Tabulation q_tab;
  int nrt = 0, nd = 0, nt = 0, nres = 0, nl = 0, nq = 0;

  // per element
  std::vector<Eigen::MatrixXd> flux_proj; // sigma -> L2(K)-orthonormal coefficients, 2 nres x nrt
  std::vector<Eigen::MatrixXd> flux_res;  // Afrak^{-1/2} applied to flux_proj
  std::vector<MatrixXc> u_res;            // u -> Afrak^{-1/2}(A^H grad u - i k conj(c) u)

  // per patch
  std::vector<PatchSpace> spaces;
  std::vector<MatrixXc> maps; // local inputs -> flux DOFs

  Impl(const FeSystem &system)
      : sys(&system), p(system.spec.degree_primal), r(system.spec.degree_primal + 2),
        rt(system.spec.degree_primal + 2)
  {
    rule = &triangle_rule(2 * r + 2);
    rt_tab = rt.tabulate(rule->points);
    div_tab = OrthonormalBasis(r).tabulate(rule->points);
    target_tab = OrthonormalBasis(p + 1).tabulate(rule->points);
    res_tab = OrthonormalBasis(r + 1).tabulate(rule->points);
    lag_tab = system.V.basis().tabulate(rule->points);
    q_tab = system.Q.basis().tabulate(rule->points);
    nrt = rt.size();
    nd = dim_p(r);
    nt = dim_p(p + 1);
    nres = dim_p(r + 1);
    nl = system.V.local_size();
    nq = system.Q.local_size();
  }

  int ndata() const { return nd + 2 * nt; }
  int ninputs() const { return nq + nl; }

  Point physical_rt(const AffineMap &map, std::size_t qp, int i) const
  {
    return map.jacobian * Point(rt_tab.vx(qp, i), rt_tab.vy(qp, i));
  }

  /// Per-element data (divergence | target_x | target_y) from the local
  /// inputs (theta | u) for the hat function of local vertex jv.
  MatrixXc data_map(int k, int jv) const
  {
    const Mesh &mesh = sys->mesh;
    const ProblemSpec &spec = sys->spec;
    const AffineMap map = mesh.affine_map(k);
    const double s = 1.0 / std::sqrt(map.det);
    const auto &cf = spec.coefficients_of(mesh.elements()[k].region);
    const double pk = sys->Q.active(k) ? spec.weights_of(mesh.elements()[k].region).p : 0.0;
    const double kw = spec.k;
    const Eigen::Matrix2cd ah = cf.A.adjoint();
    const Eigen::Vector2cd gpsi = (map.inverse.transpose() * reference_lambda_gradients[jv]).cast<Complex>();
    const ElementBasisValues ev = lagrange_values(mesh, k, lag_tab, *rule);

    MatrixXc out = MatrixXc::Zero(ndata(), ninputs());
    for (std::size_t qp = 0; qp < rule->size(); ++qp)
    {
      const double wq = ev.weights(static_cast<Eigen::Index>(qp));
      const double psi = reference_lambda(jv, rule->points[qp]);
      for (int w = 0; w < nd; ++w)
      {
        const double qw = wq * s * div_tab.values(qp, w);
        for (int m = 0; m < nq; ++m)
        {
          out(w, m) += qw * psi * kw * kw * pk * s * q_tab.values(qp, m);
        }
      }
      for (int j = 0; j < nl; ++j)
      {
        const Complex nj = ev.values(qp, j);
        const Eigen::Vector2cd g(ev.dx(qp, j), ev.dy(qp, j));
        const Eigen::Vector2cd flux = ah * g - I_unit * kw * cf.c.conjugate() * nj;
        const Complex load =
            psi * (kw * kw * std::conj(cf.d) * nj +
                   I_unit * kw * (std::conj(cf.b(0)) * g(0) + std::conj(cf.b(1)) * g(1))) -
            (gpsi(0) * flux(0) + gpsi(1) * flux(1));
        for (int w = 0; w < nd; ++w)
        {
          out(w, nq + j) += wq * s * div_tab.values(qp, w) * load;
        }
        for (int m = 0; m < nt; ++m)
        {
          const double qm = wq * s * target_tab.values(qp, m) * psi;
          out(nd + m, nq + j) += qm * flux(0);
          out(nd + nt + m, nq + j) += qm * flux(1);
        }
      }
    }
    return out;
  }

  PatchSpace build_space(const VertexPatch &patch) const
  {
    const Mesh &mesh = sys->mesh;
    PatchSpace space;
    space.vertex = patch.vertex;
    space.elements = patch.elements;
    space.mean_constraint = patch.needs_mean_constraint;
    std::vector<int> free_edges = patch.interior_edges;
    free_edges.insert(free_edges.end(), patch.dirichlet_edges.begin(), patch.dirichlet_edges.end());
    std::sort(free_edges.begin(), free_edges.end());
    const int ne = r + 1;
    const int ni = rt.interior_dofs();
    const auto nel = static_cast<int>(patch.elements.size());
    space.num_flux = static_cast<int>(free_edges.size()) * ne + nel * ni;
    space.num_multipliers = nel * nd + (space.mean_constraint ? 1 : 0);
    space.local_to_patch.resize(nel);
    for (int l = 0; l < nel; ++l)
    {
      const int k = patch.elements[l];
      auto &map = space.local_to_patch[l];
      map.assign(nrt, {-1, 0.0});
      for (int i = 0; i < 3; ++i)
      {
        const int e = mesh.element_edge(k, i);
        auto it = std::lower_bound(free_edges.begin(), free_edges.end(), e);
        if (it == free_edges.end() || *it != e)
        {
          continue;
        }
        const int base = static_cast<int>(it - free_edges.begin()) * ne;
        const bool aligned = mesh.edge_aligned(k, i);
        for (int t = 0; t < ne; ++t)
        {
          const double sign = aligned ? 1.0 : (t % 2 == 0 ? -1.0 : 1.0);
          map[i * ne + t] = {base + t, sign};
        }
      }
      const int base = static_cast<int>(free_edges.size()) * ne + l * ni;
      for (int t = 0; t < ni; ++t)
      {
        map[3 * ne + t] = {base + t, 1.0};
      }
    }
    return space;
  }

  PatchSystem build_system(const VertexPatch &patch) const
  {
    const Mesh &mesh = sys->mesh;
    const ProblemSpec &spec = sys->spec;
    PatchSystem ps;
    ps.space = build_space(patch);
    const int nf = ps.space.num_flux;
    const auto nel = static_cast<int>(patch.elements.size());
    ps.mass = Eigen::MatrixXd::Zero(nf, nf);
    ps.divergence = Eigen::MatrixXd::Zero(nel * nd, nf);
    ps.target = Eigen::MatrixXd::Zero(nf, nel * 2 * nt);
    if (ps.space.mean_constraint)
    {
      ps.mean = Eigen::VectorXd::Zero(nel * nd);
    }
    for (int l = 0; l < nel; ++l)
    {
      const int k = patch.elements[l];
      const AffineMap map = mesh.affine_map(k);
      const double s = 1.0 / std::sqrt(map.det);
      const Eigen::Matrix2d ainv = spec.weights_of(mesh.elements()[k].region).afrak.inverse();
      Eigen::MatrixXd mass = Eigen::MatrixXd::Zero(nrt, nrt);
      Eigen::MatrixXd div = Eigen::MatrixXd::Zero(nd, nrt);
      Eigen::MatrixXd target = Eigen::MatrixXd::Zero(nrt, 2 * nt);
      Eigen::MatrixXd phi(2, nrt);
      for (std::size_t qp = 0; qp < rule->size(); ++qp)
      {
        const double wq = rule->weights[qp];
        for (int i = 0; i < nrt; ++i)
        {
          phi.col(i) = physical_rt(map, qp, i);
        }
        const Eigen::MatrixXd aphi = ainv * phi;
        mass.noalias() += (wq / map.det) * phi.transpose() * aphi;
        for (int w = 0; w < nd; ++w)
        {
          div.row(w) += (wq * s * div_tab.values(qp, w)) * rt_tab.div.row(qp);
        }
        for (int m = 0; m < nt; ++m)
        {
          const double qm = wq * s * target_tab.values(qp, m);
          target.col(m) += qm * aphi.row(0).transpose();
          target.col(nt + m) += qm * aphi.row(1).transpose();
        }
      }
      const auto &l2p = ps.space.local_to_patch[l];
      for (int i = 0; i < nrt; ++i)
      {
        const auto [gi, si] = l2p[i];
        if (gi < 0)
        {
          continue;
        }
        for (int j = 0; j < nrt; ++j)
        {
          const auto [gj, sj] = l2p[j];
          if (gj >= 0)
          {
            ps.mass(gi, gj) += si * sj * mass(i, j);
          }
        }
        ps.divergence.block(l * nd, gi, nd, 1) += si * div.col(i);
        ps.target.block(gi, l * 2 * nt, 1, 2 * nt) += si * target.row(i);
      }
      if (ps.space.mean_constraint)
      {
        ps.mean(l * nd) = std::sqrt(mesh.area(k));
      }
    }
    return ps;
  }

  /// Saddle-point matrix and the map from concatenated element data to its
  /// right-hand side.
  void saddle(const PatchSystem &ps, Eigen::MatrixXd &kmat, Eigen::MatrixXd &rdata) const
  {
    const int nf = ps.space.num_flux;
    const int nm = ps.space.num_multipliers;
    const auto nel = static_cast<int>(ps.space.elements.size());
    const auto ndiv = static_cast<int>(ps.divergence.rows());
    kmat = Eigen::MatrixXd::Zero(nf + nm, nf + nm);
    kmat.topLeftCorner(nf, nf) = ps.mass;
    kmat.block(nf, 0, ndiv, nf) = ps.divergence;
    kmat.block(0, nf, nf, ndiv) = ps.divergence.transpose();
    if (ps.space.mean_constraint)
    {
      kmat.block(nf, nf + ndiv, ndiv, 1) = ps.mean;
      kmat.block(nf + ndiv, nf, 1, ndiv) = ps.mean.transpose();
    }
    const int nda = ndata();
    rdata = Eigen::MatrixXd::Zero(nf + nm, nel * nda);
    for (int l = 0; l < nel; ++l)
    {
      rdata.block(0, l * nda + nd, nf, 2 * nt) = -ps.target.middleCols(l * 2 * nt, 2 * nt);
      rdata.block(nf + l * nd, l * nda, nd, nd).setIdentity();
    }
  }

  Eigen::PartialPivLU<Eigen::MatrixXd> factor(const Eigen::MatrixXd &kmat, int vertex) const
  {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(kmat);
    if (!(lu.rcond() > 1e-13))
    {
      throw SingularSystemError("patch saddle-point system at vertex " + std::to_string(vertex + 1) +
                                " is singular");
    }
    return lu;
  }

  VectorXc gather_inputs(const std::vector<int> &elements, const VectorXc &theta,
                         const VectorXc &u) const
  {
    VectorXc z(static_cast<Eigen::Index>(elements.size()) * ninputs());
    for (std::size_t l = 0; l < elements.size(); ++l)
    {
      const int k = elements[l];
      const auto base = static_cast<Eigen::Index>(l) * ninputs();
      z.segment(base, nq) = sys->Q.local(k, theta);
      z.segment(base + nq, nl) = sys->V.local(k, u);
    }
    return z;
  }
};

Equilibrator::Equilibrator(const SolutionOperator &op, int threads)
    : op_(&op), patches_(build_patches(op.system().mesh)),
      impl_(std::make_unique<Impl>(op.system()))
{
  const FeSystem &sys = op.system();
  const Mesh &mesh = sys.mesh;
  const ProblemSpec &spec = sys.spec;
  Impl &im = *impl_;
  const double k = spec.k;
  const auto nel = mesh.num_elements();
  im.flux_res.resize(nel);
  im.u_res.resize(nel);
  im.flux_proj.resize(nel);
  parallel_for(nel, threads,
               [&](std::size_t e)
               {
                 const int kk = static_cast<int>(e);
                 const AffineMap map = mesh.affine_map(kk);
                 const double s = 1.0 / std::sqrt(map.det);
                 const auto &cf = spec.coefficients_of(mesh.elements()[e].region);
                 const auto &w = spec.weights_of(mesh.elements()[e].region);
                 const Eigen::Matrix2cd ah = cf.A.adjoint();
                 const ElementBasisValues ev = lagrange_values(mesh, kk, im.lag_tab, *im.rule);
                 Eigen::MatrixXd fp = Eigen::MatrixXd::Zero(2 * im.nres, im.nrt);
                 MatrixXc up = MatrixXc::Zero(2 * im.nres, im.nl);
                 for (std::size_t qp = 0; qp < im.rule->size(); ++qp)
                 {
                   const double wq = im.rule->weights[qp];
                   for (int i = 0; i < im.nrt; ++i)
                   {
                     const Point phi = im.physical_rt(map, qp, i);
                     for (int m = 0; m < im.nres; ++m)
                     {
                       const double qm = wq * s * im.res_tab.values(qp, m);
                       fp(m, i) += qm * phi.x();
                       fp(im.nres + m, i) += qm * phi.y();
                     }
                   }
                   for (int j = 0; j < im.nl; ++j)
                   {
                     const Eigen::Vector2cd g(ev.dx(qp, j), ev.dy(qp, j));
                     const Eigen::Vector2cd f = ah * g - I_unit * k * cf.c.conjugate() * ev.values(qp, j);
                     for (int m = 0; m < im.nres; ++m)
                     {
                       const double qm = wq * map.det * s * im.res_tab.values(qp, m);
                       up(m, j) += qm * f(0);
                       up(im.nres + m, j) += qm * f(1);
                     }
                   }
                 }
                 const Eigen::Matrix2d sq = inverse_sqrt(w.afrak);
                 im.flux_res[e] = mix_components(sq, fp, im.nres);
                 im.u_res[e] = mix_components(sq, up, im.nres);
                 im.flux_proj[e] = std::move(fp);
               });

  const auto npatch = patches_.size();
  im.spaces.resize(npatch);
  im.maps.resize(npatch);
  parallel_for(npatch, threads,
               [&](std::size_t a)
               {
                 const int vertex = static_cast<int>(a);
                 const PatchSystem ps = im.build_system(patches_[a]);
                 Eigen::MatrixXd kmat, rdata;
                 im.saddle(ps, kmat, rdata);
                 const auto lu = im.factor(kmat, vertex);
                 const Eigen::MatrixXd solved = lu.solve(rdata).topRows(ps.space.num_flux);
                 const auto nel_a = static_cast<int>(ps.space.elements.size());
                 MatrixXc dmap = MatrixXc::Zero(nel_a * im.ndata(), nel_a * im.ninputs());
                 for (int l = 0; l < nel_a; ++l)
                 {
                   const int kk = ps.space.elements[l];
                   dmap.block(l * im.ndata(), l * im.ninputs(), im.ndata(), im.ninputs()) =
                       im.data_map(kk, local_vertex(mesh, kk, vertex));
                 }
                 im.maps[a] = solved.cast<Complex>() * dmap;
                 im.spaces[a] = ps.space;
               });
}

Equilibrator::~Equilibrator() = default;

int Equilibrator::flux_order() const { return impl_->r; }

Eigen::Index Equilibrator::residual_size() const
{
  return static_cast<Eigen::Index>(system().mesh.num_elements()) * 2 * impl_->nres;
}

PatchData Equilibrator::patch_data(int vertex, const VectorXc &theta, const VectorXc &u) const
{
  const Impl &im = *impl_;
  const Mesh &mesh = system().mesh;
  PatchData data;
  data.vertex = vertex;
  data.elements = patches_[vertex].elements;
  for (int k : data.elements)
  {
    const VectorXc z = im.gather_inputs({k}, theta, u);
    const VectorXc d = im.data_map(k, local_vertex(mesh, k, vertex)) * z;
    data.divergence.push_back(d.head(im.nd));
    data.target_x.push_back(d.segment(im.nd, im.nt));
    data.target_y.push_back(d.segment(im.nd + im.nt, im.nt));
  }
  return data;
}

PatchSystem Equilibrator::patch_system(int vertex) const
{
  return impl_->build_system(patches_[vertex]);
}

PatchSolution Equilibrator::solve_patch(int vertex, const PatchData &data) const
{
  const Impl &im = *impl_;
  const PatchSystem ps = patch_system(vertex);
  Eigen::MatrixXd kmat, rdata;
  im.saddle(ps, kmat, rdata);
  const auto lu = im.factor(kmat, vertex);
  const auto nel = static_cast<int>(ps.space.elements.size());
  VectorXc dvec(nel * im.ndata());
  for (int l = 0; l < nel; ++l)
  {
    dvec.segment(l * im.ndata(), im.nd) = data.divergence[l];
    dvec.segment(l * im.ndata() + im.nd, im.nt) = data.target_x[l];
    dvec.segment(l * im.ndata() + im.nd + im.nt, im.nt) = data.target_y[l];
  }
  const VectorXc rhs = rdata.cast<Complex>() * dvec;
  const Eigen::VectorXd re = lu.solve(rhs.real());
  const Eigen::VectorXd imag = lu.solve(rhs.imag());
  VectorXc x(re.size());
  x.real() = re;
  x.imag() = imag;
  PatchSolution sol;
  const int nf = ps.space.num_flux;
  sol.flux = x.head(nf);
  sol.multipliers = x.tail(ps.space.num_multipliers);
  for (int l = 0; l < nel; ++l)
  {
    VectorXc local = VectorXc::Zero(im.nrt);
    for (int i = 0; i < im.nrt; ++i)
    {
      const auto [g, s] = ps.space.local_to_patch[l][i];
      if (g >= 0)
      {
        local(i) = s * sol.flux(g);
      }
    }
    sol.sigma.push_back(local);
  }
  return sol;
}

FluxReconstruction Equilibrator::reconstruct(const VectorXc &theta) const
{
  return reconstruct(theta, op_->apply(theta));
}

FluxReconstruction Equilibrator::reconstruct(const VectorXc &theta, const VectorXc &u) const
{
  const Impl &im = *impl_;
  FluxReconstruction flux;
  flux.theta = theta;
  flux.u = u;
  flux.sigma.assign(system().mesh.num_elements(), VectorXc::Zero(im.nrt));
  // patches in vertex order so the sum is independent of the thread count
  for (std::size_t a = 0; a < patches_.size(); ++a)
  {
    const PatchSpace &space = im.spaces[a];
    const VectorXc fa = im.maps[a] * im.gather_inputs(space.elements, theta, u);
    for (std::size_t l = 0; l < space.elements.size(); ++l)
    {
      VectorXc &target = flux.sigma[space.elements[l]];
      for (int i = 0; i < im.nrt; ++i)
      {
        const auto [g, s] = space.local_to_patch[l][i];
        if (g >= 0)
        {
          target(i) += s * fa(g);
        }
      }
    }
  }
  return flux;
}

VectorXc Equilibrator::residual(const VectorXc &theta) const
{
  return residual(reconstruct(theta));
}

VectorXc Equilibrator::residual(const FluxReconstruction &flux) const
{
  const Impl &im = *impl_;
  const auto nel = system().mesh.num_elements();
  const int block = 2 * im.nres;
  VectorXc y(static_cast<Eigen::Index>(nel) * block);
  for (std::size_t e = 0; e < nel; ++e)
  {
    const int k = static_cast<int>(e);
    y.segment(k * block, block) =
        im.flux_res[e].cast<Complex>() * flux.sigma[e] + im.u_res[e] * system().V.local(k, flux.u);
  }
  return y;
}

VectorXc Equilibrator::residual_adjoint(const VectorXc &y) const
{
  const Impl &im = *impl_;
  const FeSystem &sys = system();
  const auto nel = sys.mesh.num_elements();
  const int block = 2 * im.nres;
  std::vector<VectorXc> g_sigma(nel);
  VectorXc g_u = VectorXc::Zero(sys.V.size());
  VectorXc g_theta = VectorXc::Zero(sys.Q.size());
  for (std::size_t e = 0; e < nel; ++e)
  {
    const int k = static_cast<int>(e);
    const VectorXc yk = y.segment(k * block, block);
    g_sigma[e] = im.flux_res[e].transpose().cast<Complex>() * yk;
    const VectorXc gu = im.u_res[e].adjoint() * yk;
    for (int j = 0; j < im.nl; ++j)
    {
      const int d = sys.V.dof(k, j);
      if (d >= 0)
      {
        g_u(d) += gu(j);
      }
    }
  }
  for (std::size_t a = 0; a < patches_.size(); ++a)
  {
    const PatchSpace &space = im.spaces[a];
    VectorXc gf = VectorXc::Zero(space.num_flux);
    for (std::size_t l = 0; l < space.elements.size(); ++l)
    {
      const VectorXc &gs = g_sigma[space.elements[l]];
      for (int i = 0; i < im.nrt; ++i)
      {
        const auto [g, s] = space.local_to_patch[l][i];
        if (g >= 0)
        {
          gf(g) += s * gs(i);
        }
      }
    }
    const VectorXc gz = im.maps[a].adjoint() * gf;
    for (std::size_t l = 0; l < space.elements.size(); ++l)
    {
      const int k = space.elements[l];
      const auto base = static_cast<Eigen::Index>(l) * im.ninputs();
      if (sys.Q.active(k))
      {
        g_theta.segment(sys.Q.offset(k), im.nq) += gz.segment(base, im.nq);
      }
      for (int j = 0; j < im.nl; ++j)
      {
        const int d = sys.V.dof(k, j);
        if (d >= 0)
        {
          g_u(d) += gz(base + im.nq + j);
        }
      }
    }
  }
  return g_theta + op_->apply_adjoint(g_u);
}

Eigen::Vector2cd Equilibrator::flux_value(const FluxReconstruction &flux, int k, const Point &x) const
{
  const Impl &im = *impl_;
  const AffineMap map = system().mesh.affine_map(k);
  const auto tab = im.rt.tabulate({map.to_reference(x)});
  const Complex sx = (tab.vx.row(0).cast<Complex>() * flux.sigma[k])(0);
  const Complex sy = (tab.vy.row(0).cast<Complex>() * flux.sigma[k])(0);
  return (map.jacobian.cast<Complex>() * Eigen::Vector2cd(sx, sy)) / map.det;
}

EquilibrationCheck Equilibrator::check_equilibration(const FluxReconstruction &flux) const
{
  const Impl &im = *impl_;
  const FeSystem &sys = system();
  const Mesh &mesh = sys.mesh;
  const ProblemSpec &spec = sys.spec;
  const double kw = spec.k;
  EquilibrationCheck check;
  double total = 0.0;
  for (std::size_t e = 0; e < mesh.num_elements(); ++e)
  {
    const int k = static_cast<int>(e);
    const AffineMap map = mesh.affine_map(k);
    const auto &cf = spec.coefficients_of(mesh.elements()[e].region);
    const double pk = sys.Q.active(k) ? spec.weights_of(mesh.elements()[e].region).p : 0.0;
    const ElementBasisValues ev = lagrange_values(mesh, k, im.lag_tab, *im.rule);
    const VectorXc ul = sys.V.local(k, flux.u);
    const VectorXc tl = sys.Q.local(k, flux.theta);
    const VectorXc u = ev.values.cast<Complex>() * ul;
    const VectorXc ux = ev.dx.cast<Complex>() * ul;
    const VectorXc uy = ev.dy.cast<Complex>() * ul;
    const VectorXc th = sys.Q.scale(k) * (im.q_tab.values.cast<Complex>() * tl);
    const VectorXc div = (im.rt_tab.div.cast<Complex>() * flux.sigma[e]) / map.det;
    double res = 0.0, norm = 0.0;
    for (Eigen::Index qp = 0; qp < ev.weights.size(); ++qp)
    {
      const Complex rhs = kw * kw * pk * th(qp) + kw * kw * std::conj(cf.d) * u(qp) +
                          I_unit * kw * (std::conj(cf.b(0)) * ux(qp) + std::conj(cf.b(1)) * uy(qp));
      res += ev.weights(qp) * std::norm(div(qp) - rhs);
      norm += ev.weights(qp) * std::norm(rhs);
    }
    total += norm;
    check.max_residual = std::max(check.max_residual, std::sqrt(res));
    if (norm > 0.0)
    {
      check.max_relative_residual = std::max(check.max_relative_residual, std::sqrt(res / norm));
    }
    else if (res > 0.0)
    {
      check.max_relative_residual = std::numeric_limits<double>::infinity();
    }
  }
  check.rhs_norm = std::sqrt(total);
  return check;
}

JumpCheck Equilibrator::check_normal_jumps(const FluxReconstruction &flux) const
{
  const Mesh &mesh = system().mesh;
  const LineRule &line = line_rule(2 * impl_->r + 2);
  JumpCheck check;
  for (const Edge &edge : mesh.edges())
  {
    const Point a = mesh.vertices()[edge.vertices[0]];
    const Point b = mesh.vertices()[edge.vertices[1]];
    const Point t = b - a;
    const double length = t.norm();
    const Eigen::Vector2cd n = Eigen::Vector2d(t.y() / length, -t.x() / length).cast<Complex>();
    double jump = 0.0, trace = 0.0;
    for (std::size_t q = 0; q < line.points.size(); ++q)
    {
      const Point x = a + line.points[q] * t;
      const Complex s0 = flux_value(flux, edge.elements[0], x).dot(n.conjugate());
      const double wq = line.weights[q] * length;
      trace += wq * std::norm(s0);
      if (!edge.is_boundary())
      {
        const Complex s1 = flux_value(flux, edge.elements[1], x).dot(n.conjugate());
        jump += wq * std::norm(s0 - s1);
      }
    }
    check.flux_scale = std::max(check.flux_scale, std::sqrt(trace));
    if (!edge.is_boundary())
    {
      check.max_interior_jump = std::max(check.max_interior_jump, std::sqrt(jump));
    }
    else if (*edge.tag == BoundaryTag::Neumann)
    {
      check.max_neumann_trace = std::max(check.max_neumann_trace, std::sqrt(trace));
    }
  }
  return check;
}

void Equilibrator::write_flux(std::ostream &out, const FluxReconstruction &flux) const
{
  const Impl &im = *impl_;
  out << "# flux per element: id, count, then (re im) pairs\n";
  out << "# basis: L2(K)-orthonormal modal, degree " << im.r + 1
      << ", ascending degree; x block then y block\n";
  char buffer[64];
  for (std::size_t e = 0; e < flux.sigma.size(); ++e)
  {
    const VectorXc c = im.flux_proj[e].cast<Complex>() * flux.sigma[e];
    out << e + 1 << ' ' << c.size();
    for (Eigen::Index i = 0; i < c.size(); ++i)
    {
      std::snprintf(buffer, sizeof buffer, " %.17g %.17g", c(i).real(), c(i).imag());
      out << buffer;
    }
    out << '\n';
  }
}

RhoResult compute_rho(const Equilibrator &eq, const SpectralOptions &options,
                      Eigen::Index dense_threshold)
{
  const FeSystem &sys = eq.system();
  const Eigen::Index n = sys.Q.size();
  const double k2 = sys.spec.k * sys.spec.k;
  const Eigen::VectorXd weight = k2 * sys.pq;
  const bool dense = options.path == EigenPath::Dense ||
                     (options.path == EigenPath::Automatic && n <= dense_threshold);
  EigenResult eig;
  if (dense)
  {
    MatrixXc l(eq.residual_size(), n);
    parallel_for(static_cast<std::size_t>(n), options.threads,
                 [&](std::size_t j)
                 {
                   VectorXc unit = VectorXc::Zero(n);
                   unit(static_cast<Eigen::Index>(j)) = 1.0;
                   l.col(static_cast<Eigen::Index>(j)) = eq.residual(unit);
                 });
    eig = dense_pencil_max(l.adjoint() * l, weight);
  }
  else
  {
    const Operator apply = [&](const VectorXc &theta) -> VectorXc
    { return eq.residual_adjoint(eq.residual(theta)).cwiseQuotient(weight.cast<Complex>()); };
    const Operator w = [&](const VectorXc &x) -> VectorXc
    { return weight.cast<Complex>().cwiseProduct(x); };
    eig = lanczos_max(apply, w, n, options.lanczos);
  }
  RhoResult result;
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
