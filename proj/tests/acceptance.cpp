// SPDX-License-Identifier: Apache-2.0
// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include "helpers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

using namespace infsup;
using namespace testing_support;

namespace
{

struct Outcome
{
  bool pass = false;
  std::string detail;
};

std::string fmt(const char *f, double a)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Outcome equilibration()
{
  double worst = 0.0, jumps = 0.0;
  for (int n : {4, 8})
  {
    for (int p = 1; p <= 3; ++p)
    {
      const FeSystem sys = assemble(generate_unit_square(n), helmholtz(10.0, p));
      const SolutionOperator op(sys);
      const Equilibrator eq(op);
      std::mt19937_64 rng(100 * n + p);
      for (int t = 0; t < 20; ++t)
      {
        const FluxReconstruction f = eq.reconstruct(random_complex(sys.Q.size(), rng));
        worst = std::max(worst, eq.check_equilibration(f).max_relative_residual);
        const JumpCheck jc = eq.check_normal_jumps(f);
        jumps = std::max(jumps, jc.max_interior_jump / jc.flux_scale);
      }
    }
  }
  return {worst <= 1e-9 && jumps <= 1e-10,
          "max relative divergence residual " + fmt("%.2e", worst) + ", max relative normal jump " + fmt("%.2e", jumps)};
}

Outcome compatibility()
{
  double worst = 0.0;
  int checked = 0;
  for (int n : {4, 8})
  {
    for (int p = 1; p <= 3; ++p)
    {
      const FeSystem sys = assemble(generate_unit_square(n), helmholtz(10.0, p));
      const SolutionOperator op(sys);
      const Equilibrator eq(op);
      std::mt19937_64 rng(200 * n + p);
      const VectorXc theta = random_complex(sys.Q.size(), rng);
      const VectorXc u = op.apply(theta);
      for (const auto &patch : eq.patches())
      {
        if (!patch.needs_mean_constraint)
        {
          continue;
        }
        const PatchData d = eq.patch_data(patch.vertex, theta, u);
        worst = std::max(worst, std::abs(d.mean(sys.mesh)) / d.divergence_norm());
        ++checked;
      }
    }
  }
  return {checked > 0 && worst <= 1e-11,
          std::to_string(checked) + " constrained patches, max |mean| / data norm " + fmt("%.2e", worst)};
}

Outcome residual_control()
{
  double worst = 0.0;
  int samples = 0;
  for (int p = 1; p <= 3; ++p)
  {
    const CertificationRun run = run_certification(generate_unit_square(8), helmholtz(10.0, p));
    const ResidualControlSample s = residual_control_check(run, p == 2 ? 100 : 34, 300 + p);
    worst = std::max(worst, s.max_ratio);
    samples += s.samples;
  }
  return {samples >= 100 && worst <= 1.0 + 1e-8,
          std::to_string(samples) + " samples, max ratio " + fmt("%.6f", worst)};
}

Outcome t_coercivity()
{
  double worst = INFINITY;
  int samples = 0;
  for (int p = 1; p <= 2; ++p)
  {
    const CertificationRun run = run_certification(generate_unit_square(8), helmholtz(10.0, p));
    const CoercivitySample s = t_coercivity_check(run, 100, 400 + p);
    worst = std::min(worst, s.min_relative);
    samples += s.samples;
  }
  return {worst >= -1e-9, std::to_string(samples) + " samples, min relative margin " + fmt("%.3e", worst)};
}

Outcome positive_certificate()
{
  const Mesh m = generate_unit_square(16);
  const ProblemSpec spec = helmholtz(10.0, 2);
  const Certificate c = certify(m, spec);
  const double ref = discrete_infsup_oracle(m, spec, 2).gamma_ref;
  return {c.gamma_h > 0.0 && c.gamma_h <= 1.05 * ref,
          "gamma_h " + fmt("%.5f", c.gamma_h) + ", gamma_ref " + fmt("%.5f", ref)};
}

Outcome efficiency()
{
  // k h / v = sqrt(30) sqrt(2) / 26 = 0.298
  const Mesh m = generate_unit_square(26);
  CertifyOptions options;
  options.diagnostics = true;
  options.refinements = 1;
  const Certificate c = certify(m, helmholtz(30.0, 3), options);
  const Diagnostics &d = *c.diagnostics;
  if (!d.efficiency_ratio || !d.iota_h)
  {
    return {false, "gamma_h " + fmt("%.5f", c.gamma_h) + " leaves the ratio undefined"};
  }
  const double ratio = *d.efficiency_ratio;
  return {c.kh_over_v <= 0.3 && ratio <= 2.0 * *d.iota_h * 1.05 && ratio <= 3.0,
          "kh/v " + fmt("%.4f", c.kh_over_v) + ", ratio " + fmt("%.4f", ratio) + ", 2 iota_h " +
              fmt("%.4f", 2.0 * *d.iota_h)};
}

Outcome resonance()
{
  const Mesh m = generate_unit_square(16);
  double previous = INFINITY;
  bool ok = true;
  std::ostringstream detail;
  for (double k2 : {18.0, 19.0, 19.5, 19.7})
  {
    const ProblemSpec spec = helmholtz(k2, 2);
    const Certificate c = certify(m, spec);
    const double ref = discrete_infsup_oracle(m, spec, 2).gamma_ref;
    ok = ok && ref < previous && c.gamma_h <= 1.05 * ref;
    previous = ref;
    detail << "k^2=" << k2 << ": gamma_h " << fmt("%.5f", c.gamma_h) << " gamma_ref " << fmt("%.5f", ref) << "; ";
  }
  return {ok, detail.str()};
}

Outcome convergence()
{
  CertifyOptions options;
  options.diagnostics = true;
  double rho = INFINITY, eps = INFINITY, gamma = -INFINITY;
  bool ok = true;
  std::ostringstream detail;
  for (int n : {4, 8, 16})
  {
    const Certificate c = certify(generate_unit_square(n), helmholtz(10.0, 1), options);
    const double e = c.diagnostics->epsilon_h;
    ok = ok && c.rho_h < rho && e < eps && c.gamma_h > gamma;
    rho = c.rho_h;
    eps = e;
    gamma = c.gamma_h;
    detail << "n=" << n << ": rho " << fmt("%.4f", c.rho_h) << " eps " << fmt("%.4f", e) << " gamma_h "
           << fmt("%.4f", c.gamma_h) << "; ";
  }
  return {ok, detail.str()};
}

Outcome oracle_identity()
{
  ProblemSpec spec = helmholtz(10.0, 2);
  spec.coefficients[1].d = -1.0;
  spec.weights[1] = GardingWeights{};
  spec.default_weights[1] = false;
  const Mesh m = generate_unit_square(8);
  const double ref = discrete_infsup_oracle(m, spec, 1).gamma_ref;
  const CertificationRun run = run_certification(m, spec);
  return {std::abs(ref - 1.0) <= 1e-8 && run.theta.raw <= 1.0 + 1e-8,
          "gamma_ref - 1 = " + fmt("%.2e", ref - 1.0) + ", theta_h " + fmt("%.12f", run.theta.raw)};
}

Outcome determinism()
{
  const Mesh m = generate_unit_square(8, false);
  const ProblemSpec spec = convection_problem(10.0, 2, 1);
  CertifyOptions options;
  options.diagnostics = true;
  options.refinements = 1;
  const std::string a = to_json(certify(m, spec, options));
  const std::string b = to_json(certify(m, spec, options));
  const bool json_ok = a == b && to_json(certificate_from_json(a)) == a;

  bool mesh_ok = true;
  for (const Mesh &mesh : {m, generate_unit_square(5), refine_uniform(generate_unit_square(3, false))})
  {
    std::ostringstream first;
    write_mesh(first, mesh);
    std::istringstream in(first.str());
    std::ostringstream second;
    write_mesh(second, read_mesh(in));
    mesh_ok = mesh_ok && first.str() == second.str();
  }
  return {json_ok && mesh_ok, std::string("certificates ") + (json_ok ? "identical" : "differ") + ", mesh round trip " +
                                  (mesh_ok ? "identical" : "differs")};
}

} // namespace

int main(int argc, char **argv)
{
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"A1", equilibration},   {"A2", compatibility},        {"A3", residual_control}, {"A4", t_coercivity},
      {"A5", positive_certificate}, {"A6", efficiency},      {"A7", resonance},        {"A8", convergence},
      {"A9", oracle_identity}, {"A10", determinism}};
  int failures = 0;
  // optional arguments select criteria by name
  const std::vector<std::string> only(argv + 1, argv + argc);
  for (const auto &[name, run] : criteria)
  {
    if (!only.empty() && std::find(only.begin(), only.end(), name) == only.end())
    {
      continue;
    }
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try
    {
      out = run();
    }
    catch (const std::exception &e)
    {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %s (%.1f s) %s\n", name.c_str(), out.pass ? "PASS" : "FAIL", secs, out.detail.c_str());
    std::fflush(stdout);
    failures += out.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
