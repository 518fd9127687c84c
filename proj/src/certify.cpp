// SPDX-License-Identifier: Apache-2.0
#include "infsup/certify.hpp"

#include <Eigen/SparseCholesky>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <random>

namespace infsup
{

using ojson = nlohmann::ordered_json;

double coercivity_factor(double rho, double kh_over_v)
{
  return 1.0 - 2.0 * kh_over_v * kh_over_v - 2.0 * rho;
}

double gamma_h(double theta, double rho, double kh_over_v)
{
  return coercivity_factor(rho, kh_over_v) / (1.0 + 2.0 * theta);
}

double gamma_h_pi_variant(double theta, double rho, double kh_over_v)
{
  return gamma_h(theta, rho, kh_over_v / std::numbers::pi);
}

double symmetry_defect(const SparseMatrixc &c)
{
  const SparseMatrixc t = c.transpose();
  const double scale = c.norm();
  const double d = SparseMatrixc(c - t).norm();
  return scale > 0.0 ? d / scale : d;
}

namespace
{

template <class F> decltype(auto) stage(const char *name, F &&f)
{
  const auto tag = [name](const std::exception &e) { return std::string(name) + ": " + e.what(); };
  try
  {
    return f();
  }
  catch (const SingularSystemError &e)
  {
    throw SingularSystemError(tag(e));
  }
  catch (const ConvergenceError &e)
  {
    throw ConvergenceError(tag(e));
  }
  catch (const ValidationError &e)
  {
    throw ValidationError(tag(e));
  }
  catch (const ConfigError &e)
  {
    throw ConfigError(tag(e));
  }
  catch (const ParseError &e)
  {
    throw ParseError(tag(e));
  }
  catch (const Error &e)
  {
    throw Error(tag(e));
  }
}

ojson complex_json(Complex z) { return ojson::array({z.real(), z.imag()}); }

ojson regions_echo(const ProblemSpec &spec)
{
  ojson out = ojson::object();
  for (const auto &[id, cf] : spec.coefficients)
  {
    ojson r;
    ojson a = ojson::array();
    for (int i = 0; i < 2; ++i)
    {
      a.push_back(ojson::array({complex_json(cf.A(i, 0)), complex_json(cf.A(i, 1))}));
    }
    r["A"] = a;
    r["b"] = ojson::array({complex_json(cf.b(0)), complex_json(cf.b(1))});
    r["c"] = ojson::array({complex_json(cf.c(0)), complex_json(cf.c(1))});
    r["d"] = complex_json(cf.d);
    const GardingWeights &w = spec.weights_of(id);
    const auto def = spec.default_weights.find(id);
    r["weights"] = {{"m", w.m},
                    {"p", w.p},
                    {"Afrak", ojson::array({ojson::array({w.afrak(0, 0), w.afrak(0, 1)}),
                                            ojson::array({w.afrak(1, 0), w.afrak(1, 1)})})},
                    {"helmholtz_default", def != spec.default_weights.end() && def->second}};
    out[std::to_string(id)] = r;
  }
  return out;
}

void format_number(double x, std::string &out)
{
  if (!std::isfinite(x))
  {
    out += "null";
    return;
  }
  if (x == 0.0)
  {
    out += "0"; // drop the sign of zero so the text is stable under reparsing
    return;
  }
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  out += buf;
}

// Pretty printer with fixed 17-digit floats; deterministic for a given tree.
void dump(const ojson &j, std::string &out, int level, bool pretty)
{
  const std::string pad = pretty ? std::string(2 * (level + 1), ' ') : "";
  const std::string close = pretty ? std::string(2 * level, ' ') : "";
  const char *nl = pretty ? "\n" : "";
  const char *colon = pretty ? ": " : ":";
  switch (j.type())
  {
  case ojson::value_t::object:
  {
    if (j.empty())
    {
      out += "{}";
      return;
    }
    out += "{";
    out += nl;
    bool first = true;
    for (const auto &[key, value] : j.items())
    {
      if (!first)
      {
        out += ",";
        out += nl;
      }
      first = false;
      out += pad + ojson(key).dump() + colon;
      dump(value, out, level + 1, pretty);
    }
    out += nl + close + "}";
    return;
  }
  case ojson::value_t::array:
  {
    if (j.empty())
    {
      out += "[]";
      return;
    }
    // short numeric arrays stay on one line
    bool flat = true;
    for (const auto &v : j)
    {
      flat = flat && !v.is_structured();
    }
    out += "[";
    for (std::size_t i = 0; i < j.size(); ++i)
    {
      if (i > 0)
      {
        out += flat || !pretty ? ", " : ",";
      }
      if (!flat)
      {
        out += nl + pad;
      }
      dump(j[i], out, level + 1, pretty);
    }
    if (!flat)
    {
      out += nl + close;
    }
    out += "]";
    return;
  }
  case ojson::value_t::number_float:
    format_number(j.get<double>(), out);
    return;
  default:
    out += j.dump();
    return;
  }
}

std::string render(const ojson &j, bool pretty = true)
{
  std::string out;
  dump(j, out, 0, pretty);
  if (pretty)
  {
    out += "\n";
  }
  return out;
}

ojson optional_number(const std::optional<double> &x)
{
  return x ? ojson(*x) : ojson(nullptr);
}

std::optional<double> read_optional(const ojson &j, const char *key)
{
  if (!j.contains(key) || j.at(key).is_null())
  {
    return std::nullopt;
  }
  return j.at(key).get<double>();
}

double read_number(const ojson &j, const char *key)
{
  const ojson &v = j.at(key);
  return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
}

ojson diagnostics_tree(const Diagnostics &d)
{
  ojson j;
  j["note"] = "diagnostic, not certified";
  j["refinements"] = d.refinements;
  j["gamma_ref"] = d.gamma_ref;
  j["epsilon_h"] = d.epsilon_h;
  j["theta_ref"] = d.theta_ref;
  j["continuity_estimate"] = d.continuity;
  j["continuity_residual"] = d.continuity_residual;
  j["kfrak"] = d.kfrak;
  j["iota_h"] = optional_number(d.iota_h);
  j["efficiency_ratio"] = optional_number(d.efficiency_ratio);
  j["symmetric"] = d.symmetric;
  j["symmetry_defect"] = d.symmetry_defect;
  j["theta_bound_holds"] = d.theta_bound_holds;
  j["efficiency_holds"] = d.efficiency_holds ? ojson(*d.efficiency_holds) : ojson(nullptr);
  j["gamma_h_pi_variant"] = d.gamma_h_pi_variant;
  ojson patches = ojson::array();
  for (const auto &p : d.patches)
  {
    patches.push_back(ojson::array({p.vertex, p.wavespeed, p.contrast, p.diameter}));
  }
  j["patch_columns"] = ojson::array({"vertex", "wavespeed", "contrast", "diameter"});
  j["patches"] = patches;
  return j;
}

Diagnostics diagnostics_from_tree(const ojson &j)
{
  Diagnostics d;
  d.refinements = j.at("refinements").get<int>();
  d.gamma_ref = read_number(j, "gamma_ref");
  d.epsilon_h = read_number(j, "epsilon_h");
  d.theta_ref = read_number(j, "theta_ref");
  d.continuity = read_number(j, "continuity_estimate");
  d.continuity_residual = read_number(j, "continuity_residual");
  d.kfrak = read_number(j, "kfrak");
  d.iota_h = read_optional(j, "iota_h");
  d.efficiency_ratio = read_optional(j, "efficiency_ratio");
  d.symmetric = j.at("symmetric").get<bool>();
  d.symmetry_defect = read_number(j, "symmetry_defect");
  d.theta_bound_holds = j.at("theta_bound_holds").get<bool>();
  if (!j.at("efficiency_holds").is_null())
  {
    d.efficiency_holds = j.at("efficiency_holds").get<bool>();
  }
  d.gamma_h_pi_variant = read_number(j, "gamma_h_pi_variant");
  for (const auto &row : j.at("patches"))
  {
    d.patches.push_back({row.at(0).get<int>(), row.at(1).get<double>(), row.at(2).get<double>(),
                         row.at(3).get<double>()});
  }
  return d;
}

VectorXc random_vector(Eigen::Index n, std::mt19937_64 &rng)
{
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  VectorXc x(n);
  for (Eigen::Index i = 0; i < n; ++i)
  {
    const double re = dist(rng);
    const double im = dist(rng);
    x(i) = {re, im};
  }
  return x;
}

Refinement refine_times(const Mesh &mesh, int times)
{
  Refinement out{mesh, {}};
  out.parent.resize(mesh.num_elements());
  for (std::size_t e = 0; e < mesh.num_elements(); ++e)
  {
    out.parent[e] = static_cast<int>(e);
  }
  for (int r = 0; r < times; ++r)
  {
    Refinement next = refine_uniform_tracked(out.mesh);
    for (int &p : next.parent)
    {
      p = out.parent[p];
    }
    out = std::move(next);
  }
  return out;
}

// 1 / sqrt(lambda_max(A^{-1} E A^{-H} E)) with A = C^T, self-adjoint in E.
double infsup_from_factor(const FeSystem &sys, const ComplexLU &lu, const LanczosOptions &opts,
                          double *residual)
{
  const SparseMatrixc e = sys.E.cast<Complex>();
  const Operator z = [&](const VectorXc &x) -> VectorXc
  {
    const VectorXc y = e * lu.solve_conjugate(e * x);
    return lu.solve(y, ComplexLU::Mode::Transpose);
  };
  const Operator w = [&](const VectorXc &x) -> VectorXc { return e * x; };
  const EigenResult eig = lanczos_max(z, w, sys.V.size(), opts);
  if (residual != nullptr)
  {
    *residual = eig.residual;
  }
  return 1.0 / std::sqrt(eig.value);
}

} // namespace

CertificationRun run_certification(const Mesh &mesh, const ProblemSpec &spec,
                                   const CertifyOptions &options)
{
  CertificationRun run;
  SpectralOptions spectral = options.spectral;
  spectral.threads = options.threads;

  stage("validate", [&] { spec.validate(mesh); });
  run.garding = stage("garding_check", [&] { return garding_check(mesh, spec); });
  run.system = stage("assemble", [&] { return std::make_unique<FeSystem>(assemble(mesh, spec, options.threads)); });
  const double defect = symmetry_defect(run.system->C);
  if (spec.symmetric && defect > 1e-12)
  {
    throw ConfigError("assemble: form declared symmetric but C differs from its transpose (relative defect " +
                      std::to_string(defect) + ")");
  }
  run.op = stage("solve", [&] { return std::make_unique<SolutionOperator>(*run.system, options.solver_tol); });
  run.theta = stage("compute_theta", [&] { return compute_theta(*run.op, spectral); });
  run.equilibrator = stage("reconstruct_flux", [&] { return std::make_unique<Equilibrator>(*run.op, options.threads); });
  run.rho = stage("compute_rho", [&] { return compute_rho(*run.equilibrator, spectral, options.rho_dense_threshold); });
  const WorstCell wc = stage("gamma_h", [&] { return worst_cell(mesh, spec); });

  Certificate &c = run.certificate;
  c.theta_h = run.theta.value;
  c.rho_h = run.rho.value;
  c.kh_over_v = spec.k * wc.h / wc.wavespeed;
  c.gamma_h = gamma_h(c.theta_h, c.rho_h, c.kh_over_v);
  c.gamma_h_pi_variant = gamma_h_pi_variant(c.theta_h, c.rho_h, c.kh_over_v);
  c.garding_margin = run.garding.min_margin;
  c.garding_passed = run.garding.passed;
  c.certified = c.gamma_h > 0.0 && c.garding_passed;
  if (c.certified)
  {
    c.stability_bound = 1.0 / c.gamma_h;
  }
  c.theta_safety = run.theta.safety;
  c.rho_safety = run.rho.safety;
  c.theta_raw = run.theta.raw;
  c.rho_raw = run.rho.raw;
  c.solver_tol = options.solver_tol;
  c.theta_path = run.theta.dense ? "dense" : "lanczos";
  c.rho_path = run.rho.dense ? "dense" : "lanczos";

  c.k = spec.k;
  c.degree_primal = spec.degree_primal;
  c.degree_broken = spec.degree_broken;
  c.symmetric_declared = spec.symmetric;
  c.num_vertices = mesh.num_vertices();
  c.num_elements = mesh.num_elements();
  c.primal_dofs = run.system->V.size();
  c.broken_dofs = run.system->Q.size();
  c.h_star = wc.h;
  c.wavespeed_star = wc.wavespeed;
  c.worst_element = wc.element;
  c.regions_json = render(regions_echo(spec), false);

  if (!run.garding.passed)
  {
    c.warnings.push_back("Garding check failed (min margin " + std::to_string(run.garding.min_margin) + ")");
  }
  if (!run.garding.p_exceeds_m.empty())
  {
    c.warnings.push_back("weight p exceeds m on " + std::to_string(run.garding.p_exceeds_m.size()) +
                         " elements");
  }
  return run;
}

Certificate certify(const Mesh &mesh, const ProblemSpec &spec, const CertifyOptions &options)
{
  CertificationRun run = run_certification(mesh, spec, options);
  if (options.diagnostics)
  {
    run.certificate.diagnostics = efficiency_diagnostics(run, options);
  }
  return std::move(run.certificate);
}

CoercivitySample t_coercivity_check(const CertificationRun &run, int samples, std::uint64_t seed)
{
  const FeSystem &sys = *run.system;
  const Mesh &mesh = sys.mesh;
  const ProblemSpec &spec = sys.spec;
  const LagrangeSpace rich(mesh, spec.degree_primal + 2);
  std::mt19937_64 rng(seed);

  CoercivitySample out;
  out.factor = coercivity_factor(run.certificate.rho_h, run.certificate.kh_over_v);
  out.samples = samples;
  double min_value = std::numeric_limits<double>::infinity();
  double min_relative = std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s)
  {
    const VectorXc u = random_vector(rich.size(), rng);
    const VectorXc theta = project_pi_h(mesh, sys.Q, rich, u);
    const VectorXc uh = run.op->apply(theta);
    const Complex lhs = evaluate_beta(mesh, spec, rich, u, rich, u) +
                        2.0 * evaluate_beta(mesh, spec, rich, u, sys.V, uh);
    const double energy = energy_norm_squared(mesh, spec, rich, u);
    const double value = lhs.real() - out.factor * energy;
    min_value = std::min(min_value, value);
    min_relative = std::min(min_relative, energy > 0.0 ? value / energy : value);
  }
  if (samples > 0)
  {
    out.min_value = min_value;
    out.min_relative = min_relative;
  }
  return out;
}

ResidualControlSample residual_control_check(const CertificationRun &run, int samples,
                                             std::uint64_t seed)
{
  const FeSystem &sys = *run.system;
  const Mesh &mesh = sys.mesh;
  const ProblemSpec &spec = sys.spec;
  const LagrangeSpace rich(mesh, spec.degree_primal + 2);
  std::mt19937_64 rng(seed);

  ResidualControlSample out;
  out.samples = samples;
  for (int s = 0; s < samples; ++s)
  {
    const VectorXc theta = random_vector(sys.Q.size(), rng);
    const VectorXc w = random_vector(rich.size(), rng);
    const VectorXc uh = run.op->apply(theta);
    const FluxReconstruction flux = run.equilibrator->reconstruct(theta, uh);
    const double residual = run.equilibrator->residual(flux).norm();
    const double gradient = std::sqrt(afrak_seminorm_squared(mesh, spec, rich, w));
    const double gap = std::abs(evaluate_coupling(mesh, spec, rich, w, sys.Q, theta) -
                                evaluate_beta(mesh, spec, rich, w, sys.V, uh));
    const double bound = residual * gradient;
    out.max_ratio = std::max(out.max_ratio, bound > 0.0 ? gap / bound : (gap > 0.0 ? INFINITY : 0.0));
  }
  return out;
}

OracleResult discrete_infsup_oracle(const Mesh &mesh, const ProblemSpec &spec, int refinements,
                                    const CertifyOptions &options)
{
  return stage("oracle",
               [&]
               {
                 const Refinement fine = refine_times(mesh, refinements);
                 const FeSystem sys = assemble(fine.mesh, spec, options.threads);
                 const ComplexLU lu(sys.C);
                 OracleResult out;
                 out.refinements = refinements;
                 out.dofs = sys.V.size();
                 out.gamma_ref = infsup_from_factor(sys, lu, options.spectral.lanczos, &out.residual);
                 return out;
               });
}

ContinuityEstimate continuity_estimate(const FeSystem &sys, const LanczosOptions &options)
{
  Eigen::SimplicialLDLT<SparseMatrixd> ldlt(sys.E);
  if (ldlt.info() != Eigen::Success)
  {
    throw SingularSystemError("energy Gram matrix is not positive definite");
  }
  const auto solve = [&](const VectorXc &b) -> VectorXc
  {
    const Eigen::VectorXd re = ldlt.solve(b.real());
    const Eigen::VectorXd im = ldlt.solve(b.imag());
    VectorXc x(b.size());
    x.real() = re;
    x.imag() = im;
    return x;
  };
  const SparseMatrixc ct = sys.C.transpose();
  const SparseMatrixc cbar = sys.C.conjugate();
  const SparseMatrixc e = sys.E.cast<Complex>();
  const Operator op = [&](const VectorXc &x) -> VectorXc { return solve(cbar * solve(ct * x)); };
  const Operator w = [&](const VectorXc &x) -> VectorXc { return e * x; };
  const EigenResult r = lanczos_max(op, w, sys.V.size(), options);
  // sqrt halves the relative residual of the squared quantity, to first order
  return {std::sqrt(r.value), 0.5 * r.residual, r.converged};
}

Diagnostics efficiency_diagnostics(const CertificationRun &run, const CertifyOptions &options)
{
  return stage(
      "efficiency_diagnostics",
      [&]
      {
        const FeSystem &sys = *run.system;
        const Mesh &mesh = sys.mesh;
        const ProblemSpec &spec = sys.spec;
        const Certificate &cert = run.certificate;
        SpectralOptions spectral = options.spectral;
        spectral.threads = options.threads;
        const double k2 = spec.k * spec.k;

        Diagnostics d;
        d.refinements = options.refinements;
        const Refinement fine = refine_times(mesh, options.refinements);
        const FeSystem ref = assemble(fine.mesh, spec, options.threads);
        const SolutionOperator ref_op(ref, options.solver_tol);

        d.gamma_ref = infsup_from_factor(ref, ref_op.lu(), spectral.lanczos, nullptr);
        d.theta_ref = compute_theta(ref_op, spectral).raw;
        LanczosOptions cluster = spectral.lanczos;
        cluster.allow_unconverged = true;
        const ContinuityEstimate ce = continuity_estimate(ref, cluster);
        d.continuity = ce.value;
        d.continuity_residual = ce.residual;

        // max |||(P_ref - P_h) theta||| over k ||theta||_m = 1, measured on the fine mesh
        const SparseMatrixd prolong = lagrange_prolongation(mesh, sys.V, fine.mesh, ref.V, fine.parent);
        const SparseMatrixd lift = broken_transfer(mesh, sys.Q, fine.mesh, ref.Q, fine.parent);
        const SparseMatrixc prolong_c = prolong.cast<Complex>();
        const SparseMatrixc lift_c = lift.cast<Complex>();
        const SparseMatrixc e_ref = ref.E.cast<Complex>();
        const VectorXc weight = (k2 * sys.mq).cast<Complex>();
        const Operator gap = [&](const VectorXc &theta) -> VectorXc
        {
          const VectorXc diff = ref_op.apply(lift_c * theta) - prolong_c * run.op->apply(theta);
          const VectorXc y = e_ref * diff;
          const VectorXc back = lift_c.transpose() * ref_op.apply_adjoint(y) -
                                run.op->apply_adjoint(prolong_c.transpose() * y);
          return back.cwiseQuotient(weight);
        };
        const Operator w = [&](const VectorXc &x) -> VectorXc { return weight.cwiseProduct(x); };
        d.epsilon_h = std::sqrt(std::max(lanczos_max(gap, w, sys.Q.size(), spectral.lanczos).value, 0.0));

        d.kfrak = kfrak(mesh, spec);
        const double factor = coercivity_factor(cert.rho_h, cert.kh_over_v);
        if (factor > 0.0 && d.theta_ref > 0.0)
        {
          d.iota_h = (1.0 / factor) * (1.0 + (1.0 + 2.0 * d.epsilon_h) / (2.0 * d.theta_ref));
        }
        if (cert.gamma_h > 0.0)
        {
          d.efficiency_ratio = d.gamma_ref / cert.gamma_h;
        }
        d.symmetry_defect = symmetry_defect(sys.C);
        d.symmetric = d.symmetry_defect <= 1e-12;
        d.theta_bound_holds = cert.theta_raw <= (d.theta_ref + d.epsilon_h) * (1.0 + 1e-12);
        if (d.symmetric && d.iota_h && d.efficiency_ratio)
        {
          d.efficiency_holds = *d.efficiency_ratio <= 2.0 * d.kfrak * *d.iota_h;
        }
        d.gamma_h_pi_variant = cert.gamma_h_pi_variant;
        for (const VertexPatch &patch : run.equilibrator->patches())
        {
          const PatchConstants pc = patch_constants(patch, mesh, spec);
          d.patches.push_back({patch.vertex, pc.wavespeed, pc.contrast, patch.diameter});
        }
        return d;
      });
}

std::string to_json(const Diagnostics &diag) { return render(diagnostics_tree(diag)); }

std::string to_json(const Certificate &c)
{
  ojson j;
  j["gamma_h"] = c.gamma_h;
  j["theta_h"] = c.theta_h;
  j["rho_h"] = c.rho_h;
  j["kh_over_v"] = c.kh_over_v;
  j["verdict"] = c.verdict();
  j["stability_bound"] = optional_number(c.stability_bound);
  j["garding_margin"] = c.garding_margin;
  j["garding_passed"] = c.garding_passed;
  j["conventions"] = {
      {"gamma_formula", "(1 - 2 (k h/v)^2 - 2 rho_h) / (1 + 2 theta_h)"},
      {"lower_bound", "gamma_h <= inf_u sup_v Re beta(u, v) over unit-energy pairs"},
      {"gamma_h_pi_variant", c.gamma_h_pi_variant},
      {"pi_variant_note", "uses (k h/(pi v))^2; diagnostic only, not certified"},
      {"theta_normalization", "k ||theta||_m = 1"},
      {"rho_normalization", "k ||theta||_p = 1"},
      {"theta_safety", c.theta_safety},
      {"rho_safety", c.rho_safety},
      {"theta_raw", c.theta_raw},
      {"rho_raw", c.rho_raw},
      {"theta_eigen_path", c.theta_path},
      {"rho_eigen_path", c.rho_path},
      {"solver_tol", c.solver_tol}};
  j["inputs"] = {{"mesh_source", c.mesh_source},
                 {"config_source", c.config_source},
                 {"k", c.k},
                 {"degree_primal", c.degree_primal},
                 {"degree_broken", c.degree_broken},
                 {"symmetric_declared", c.symmetric_declared},
                 {"num_vertices", c.num_vertices},
                 {"num_elements", c.num_elements},
                 {"primal_dofs", c.primal_dofs},
                 {"broken_dofs", c.broken_dofs},
                 {"h_star", c.h_star},
                 {"wavespeed_star", c.wavespeed_star},
                 {"worst_element", c.worst_element},
                 {"regions", c.regions_json.empty() ? ojson::object() : ojson::parse(c.regions_json)}};
  j["warnings"] = c.warnings;
  if (c.diagnostics)
  {
    j["diagnostics"] = diagnostics_tree(*c.diagnostics);
  }
  return render(j);
}

Certificate certificate_from_json(const std::string &text)
{
  ojson j;
  try
  {
    j = ojson::parse(text);
  }
  catch (const std::exception &e)
  {
    throw ParseError(std::string("certificate: ") + e.what());
  }
  try
  {
    Certificate c;
    c.gamma_h = read_number(j, "gamma_h");
    c.theta_h = read_number(j, "theta_h");
    c.rho_h = read_number(j, "rho_h");
    c.kh_over_v = read_number(j, "kh_over_v");
    c.certified = j.at("verdict").get<std::string>() == "certified";
    c.stability_bound = read_optional(j, "stability_bound");
    c.garding_margin = read_number(j, "garding_margin");
    c.garding_passed = j.at("garding_passed").get<bool>();
    const ojson &conv = j.at("conventions");
    c.gamma_h_pi_variant = read_number(conv, "gamma_h_pi_variant");
    c.theta_safety = read_number(conv, "theta_safety");
    c.rho_safety = read_number(conv, "rho_safety");
    c.theta_raw = read_number(conv, "theta_raw");
    c.rho_raw = read_number(conv, "rho_raw");
    c.theta_path = conv.at("theta_eigen_path").get<std::string>();
    c.rho_path = conv.at("rho_eigen_path").get<std::string>();
    c.solver_tol = read_number(conv, "solver_tol");
    const ojson &in = j.at("inputs");
    c.mesh_source = in.at("mesh_source").get<std::string>();
    c.config_source = in.at("config_source").get<std::string>();
    c.k = read_number(in, "k");
    c.degree_primal = in.at("degree_primal").get<int>();
    c.degree_broken = in.at("degree_broken").get<int>();
    c.symmetric_declared = in.at("symmetric_declared").get<bool>();
    c.num_vertices = in.at("num_vertices").get<std::size_t>();
    c.num_elements = in.at("num_elements").get<std::size_t>();
    c.primal_dofs = in.at("primal_dofs").get<Eigen::Index>();
    c.broken_dofs = in.at("broken_dofs").get<Eigen::Index>();
    c.h_star = read_number(in, "h_star");
    c.wavespeed_star = read_number(in, "wavespeed_star");
    c.worst_element = in.at("worst_element").get<int>();
    c.regions_json = render(in.at("regions"), false);
    c.warnings = j.at("warnings").get<std::vector<std::string>>();
    if (j.contains("diagnostics"))
    {
      c.diagnostics = diagnostics_from_tree(j.at("diagnostics"));
    }
    return c;
  }
  catch (const nlohmann::json::exception &e)
  {
    throw ParseError(std::string("certificate: ") + e.what());
  }
}

} // namespace infsup
