// SPDX-License-Identifier: Apache-2.0
#include "helpers.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace infsup;
using namespace testing_support;

namespace
{

// Inf-sup constant of -Laplace - k^2 on the unit square with Dirichlet data,
// measured in k^2 ||u||^2 + ||grad u||^2, from the eigenvalues pi^2 (i^2 + j^2).
double square_infsup(double k2, int modes = 200)
{
  double best = INFINITY;
  for (int i = 1; i <= modes; ++i)
  {
    for (int j = 1; j <= modes; ++j)
    {
      const double lambda = M_PI * M_PI * (i * i + j * j);
      best = std::min(best, std::abs(lambda - k2) / (lambda + k2));
    }
  }
  return best;
}

ProblemSpec coercive(double k2, int p)
{
  ProblemSpec spec = helmholtz(k2, p);
  spec.coefficients[1].d = -1.0;
  spec.weights[1] = GardingWeights{};
  spec.default_weights[1] = false;
  return spec;
}

} // namespace

TEST(GammaFormula, KnownValues)
{
  EXPECT_DOUBLE_EQ(gamma_h(0.0, 0.0, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(gamma_h(0.5, 0.25, 0.0), 0.25);
  EXPECT_DOUBLE_EQ(gamma_h(0.0, 0.0, 1.0), -1.0);
  EXPECT_DOUBLE_EQ(coercivity_factor(0.25, 0.5), 0.0);
  EXPECT_NEAR(gamma_h_pi_variant(0.0, 0.0, M_PI), -1.0, 1e-15);
}

TEST(GammaFormula, Monotone)
{
  const double base = gamma_h(0.7, 0.05, 0.2);
  EXPECT_LT(gamma_h(0.8, 0.05, 0.2), base);
  EXPECT_LT(gamma_h(0.7, 0.06, 0.2), base);
  EXPECT_LT(gamma_h(0.7, 0.05, 0.3), base);
  EXPECT_GE(gamma_h_pi_variant(0.7, 0.05, 0.2), base);
}

TEST(Certify, StableHelmholtzIsCertified)
{
  const Certificate c = certify(generate_unit_square(16), helmholtz(10.0, 2));
  EXPECT_TRUE(c.certified);
  EXPECT_EQ(c.verdict(), "certified");
  EXPECT_GT(c.gamma_h, 0.0);
  EXPECT_LE(c.gamma_h, 1.0);
  ASSERT_TRUE(c.stability_bound.has_value());
  EXPECT_NEAR(*c.stability_bound, 1.0 / c.gamma_h, 1e-12 * *c.stability_bound);
  EXPECT_NEAR(c.kh_over_v, std::sqrt(10.0) * std::sqrt(2.0) / 16.0, 1e-12);
  EXPECT_DOUBLE_EQ(c.gamma_h, gamma_h(c.theta_h, c.rho_h, c.kh_over_v));
  EXPECT_TRUE(c.garding_passed);
}

TEST(Certify, ResonantProblemIsNotCertified)
{
  const Certificate c = certify(generate_unit_square(4), helmholtz(2.0 * M_PI * M_PI, 1));
  EXPECT_FALSE(c.certified);
  EXPECT_EQ(c.verdict(), "not-certified");
  EXPECT_LE(c.gamma_h, 0.0);
  EXPECT_FALSE(c.stability_bound.has_value());
}

TEST(Certify, InactiveRegionCarriesNoBrokenDofs)
{
  const Mesh base = generate_unit_square(8);
  std::vector<Element> els = base.elements();
  int active = 0;
  for (std::size_t e = 0; e < els.size(); ++e)
  {
    double cx = 0.0;
    for (int v : els[e].vertices)
    {
      cx += base.vertices()[v].x() / 3.0;
    }
    els[e].region = cx < 0.5 ? 1 : 2;
    active += els[e].region == 1;
  }
  const Mesh m(base.vertices(), els, base.boundary());
  ProblemSpec spec = helmholtz(6.0, 2, 1);
  spec.coefficients[2] = spec.coefficients[1];
  spec.coefficients[2].d = -1.0;
  spec.weights[2] = GardingWeights{};
  spec.weights[2].p = 0.0;
  spec.default_weights[2] = false;
  const Certificate c = certify(m, spec);
  EXPECT_EQ(c.broken_dofs, active * 3);
  EXPECT_TRUE(c.garding_passed);
  EXPECT_TRUE(std::isfinite(c.gamma_h));
  EXPECT_LE(c.gamma_h, 1.0);
}

TEST(Certify, DeclaredSymmetryIsChecked)
{
  ProblemSpec spec = convection_problem(5.0, 1);
  spec.symmetric = true;
  try
  {
    (void)certify(generate_unit_square(3), spec);
    FAIL() << "expected a configuration error";
  }
  catch (const ConfigError &e)
  {
    EXPECT_NE(std::string(e.what()).find("symmetric"), std::string::npos);
  }
  EXPECT_GT(symmetry_defect(assemble(generate_unit_square(3), spec).C), 1e-3);
  EXPECT_LE(symmetry_defect(assemble(generate_unit_square(3), helmholtz(5.0, 1)).C), 1e-14);
}

TEST(Certify, FailedGardingIsReported)
{
  ProblemSpec spec = helmholtz(10.0, 1);
  spec.weights[1].p = 0.2; // too small to compensate -k^2
  spec.default_weights[1] = false;
  const Certificate c = certify(generate_unit_square(4), spec);
  EXPECT_FALSE(c.garding_passed);
  EXPECT_FALSE(c.certified);
  EXPECT_FALSE(c.warnings.empty());
}

TEST(Checks, TCoercivityAndResidualControl)
{
  for (const ProblemSpec &spec : {helmholtz(10.0, 1), convection_problem(8.0, 2, 1)})
  {
    const CertificationRun run = run_certification(generate_unit_square(4, false), spec);
    const CoercivitySample cs = t_coercivity_check(run, 20, 7);
    EXPECT_EQ(cs.samples, 20);
    EXPECT_GE(cs.min_relative, -1e-9);
    const ResidualControlSample rs = residual_control_check(run, 20, 9);
    EXPECT_LE(rs.max_ratio, 1.0 + 1e-8);
    EXPECT_GT(rs.max_ratio, 0.0);
  }
}

TEST(Oracle, CoerciveCaseIsOne)
{
  const OracleResult r = discrete_infsup_oracle(generate_unit_square(4), coercive(5.0, 2), 1);
  EXPECT_NEAR(r.gamma_ref, 1.0, 1e-8);
  EXPECT_EQ(r.refinements, 1);
}

TEST(Oracle, MatchesEigenExpansion)
{
  const double exact = square_infsup(10.0);
  const OracleResult r = discrete_infsup_oracle(generate_unit_square(8), helmholtz(10.0, 2), 2);
  EXPECT_NEAR(r.gamma_ref, exact, 0.02 * exact);
  // the discrete eigenvalues lie above the continuous ones, so the first gap widens
  EXPECT_GE(r.gamma_ref, exact * (1 - 1e-8));
}

TEST(Oracle, MatchesEigenExpansionBetweenEigenvalues)
{
  // k^2 = 30 lies between 2 pi^2 and 5 pi^2
  const double exact = square_infsup(30.0);
  const OracleResult r = discrete_infsup_oracle(generate_unit_square(8), helmholtz(30.0, 2), 2);
  EXPECT_NEAR(r.gamma_ref, exact, 0.03 * exact);
  const double r2 = discrete_infsup_oracle(generate_unit_square(4), helmholtz(30.0, 2), 2).gamma_ref;
  const double r3 = discrete_infsup_oracle(generate_unit_square(4), helmholtz(30.0, 2), 3).gamma_ref;
  EXPECT_NEAR(r2, r3, 0.02 * r3);
}

TEST(Oracle, ConvergesUnderRefinement)
{
  const double exact = square_infsup(12.0);
  double previous = INFINITY;
  for (int r = 0; r <= 2; ++r)
  {
    const double g = discrete_infsup_oracle(generate_unit_square(4), helmholtz(12.0, 1), r).gamma_ref;
    EXPECT_LT(std::abs(g - exact), previous) << "refinements = " << r;
    previous = std::abs(g - exact);
  }
}

TEST(Oracle, ContinuityBoundsInfSup)
{
  const FeSystem sys = assemble(generate_unit_square(6), helmholtz(10.0, 2));
  const double m = continuity_estimate(sys).value;
  // |lambda - k^2| / (lambda + k^2) < 1 for every eigenvalue
  EXPECT_LT(m, 1.0);
  EXPECT_GT(m, 0.9);
  EXPECT_GT(m, discrete_infsup_oracle(generate_unit_square(6), helmholtz(10.0, 2), 0).gamma_ref);
}

TEST(Diagnostics, ConstantWeightsAndSymmetricForm)
{
  CertifyOptions options;
  options.diagnostics = true;
  options.refinements = 1;
  const Certificate c = certify(generate_unit_square(8), helmholtz(10.0, 2), options);
  ASSERT_TRUE(c.diagnostics.has_value());
  const Diagnostics &d = *c.diagnostics;
  EXPECT_DOUBLE_EQ(d.kfrak, 1.0);
  EXPECT_TRUE(d.symmetric);
  EXPECT_TRUE(d.efficiency_holds.has_value());
  EXPECT_TRUE(d.iota_h.has_value());
  EXPECT_GT(d.gamma_ref, 0.0);
  EXPECT_GE(d.epsilon_h, 0.0);
  EXPECT_TRUE(d.theta_bound_holds);
  EXPECT_EQ(d.patches.size(), 81u);
  for (const auto &p : d.patches)
  {
    EXPECT_DOUBLE_EQ(p.contrast, 1.0);
  }
}

TEST(Diagnostics, NonsymmetricFormSkipsEfficiencyCheck)
{
  CertifyOptions options;
  options.refinements = 1;
  const CertificationRun run = run_certification(generate_unit_square(4), convection_problem(5.0, 1), options);
  const Diagnostics d = efficiency_diagnostics(run, options);
  EXPECT_FALSE(d.symmetric);
  EXPECT_FALSE(d.efficiency_holds.has_value());
  EXPECT_GT(d.symmetry_defect, 1e-12);
}

TEST(CertificateJson, RoundTripIsExact)
{
  CertifyOptions options;
  options.diagnostics = true;
  options.refinements = 1;
  Certificate c = certify(generate_unit_square(6), convection_problem(6.0, 2, 1), options);
  c.mesh_source = "square:6";
  c.config_source = "inline";
  const std::string text = to_json(c);
  const Certificate back = certificate_from_json(text);
  EXPECT_EQ(to_json(back), text);
  EXPECT_EQ(back.gamma_h, c.gamma_h);
  EXPECT_EQ(back.theta_h, c.theta_h);
  EXPECT_EQ(back.rho_h, c.rho_h);
  EXPECT_EQ(back.verdict(), c.verdict());
  EXPECT_THROW(certificate_from_json("{\"gamma_h\": 1"), ParseError);
}

TEST(CertificateJson, KeyOrderAndDeterminism)
{
  const Mesh m = generate_unit_square(5);
  const std::string a = to_json(certify(m, helmholtz(7.0, 1)));
  const std::string b = to_json(certify(m, helmholtz(7.0, 1)));
  EXPECT_EQ(a, b);
  const auto pos = [&](const char *key) { return a.find(std::string("\"") + key + "\""); };
  EXPECT_LT(pos("gamma_h"), pos("theta_h"));
  EXPECT_LT(pos("theta_h"), pos("rho_h"));
  EXPECT_LT(pos("rho_h"), pos("kh_over_v"));
  EXPECT_LT(pos("kh_over_v"), pos("verdict"));
  EXPECT_LT(pos("verdict"), pos("conventions"));
  EXPECT_EQ(a.find("diagnostics"), std::string::npos);
}

TEST(Stages, FailuresNameTheStage)
{
  ProblemSpec spec = helmholtz(1.0, 1);
  spec.coefficients[1].A.setZero();
  spec.coefficients[1].d = 0.0;
  spec.symmetric = false;
  try
  {
    (void)certify(generate_unit_square(2), spec);
    FAIL() << "expected a failure";
  }
  catch (const Error &e)
  {
    const std::string what = e.what();
    EXPECT_TRUE(what.find("solve:") == 0 || what.find("validate:") == 0 || what.find("garding_check:") == 0)
        << what;
  }
}
