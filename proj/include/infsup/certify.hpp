// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "infsup/equilibrate.hpp"

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace infsup
{

/// (1 - 2 (k h / v)^2 - 2 rho) / (1 + 2 theta)
double gamma_h(double theta, double rho, double kh_over_v);

/// The sharper variant with (k h / (pi v))^2; reported, never certified.
double gamma_h_pi_variant(double theta, double rho, double kh_over_v);

/// 1 - 2 (k h / v)^2 - 2 rho
double coercivity_factor(double rho, double kh_over_v);

struct CertifyOptions
{
  SpectralOptions spectral{};
  double solver_tol = 1e-10;
  Eigen::Index rho_dense_threshold = 256;
  int threads = 1;
  bool diagnostics = false;
  int refinements = 2;
};

struct PatchDiagnostic
{
  int vertex = -1;
  double wavespeed = 0.0;
  double contrast = 1.0;
  double diameter = 0.0;
};

/// Estimates of continuous quantities on refined meshes. Never fed back into
/// the certified value.
struct Diagnostics
{
  int refinements = 0;
  double gamma_ref = 0.0;
  double epsilon_h = 0.0;
  double theta_ref = 0.0;
  double continuity = 0.0; // largest singular value of C in E-geometry
  double continuity_residual = 0.0;
  double kfrak = 0.0;
  std::optional<double> iota_h;
  std::optional<double> efficiency_ratio;
  bool symmetric = false;
  double symmetry_defect = 0.0;
  bool theta_bound_holds = false;          // theta_h <= theta_ref + epsilon_h
  std::optional<bool> efficiency_holds;    // ratio <= 2 kfrak iota_h (symmetric forms only)
  double gamma_h_pi_variant = 0.0;
  std::vector<PatchDiagnostic> patches;
};

struct Certificate
{
  double gamma_h = 0.0;
  double theta_h = 0.0;
  double rho_h = 0.0;
  double kh_over_v = 0.0;
  double garding_margin = 0.0;
  bool garding_passed = false;
  bool certified = false;
  std::optional<double> stability_bound;

  // conventions
  double theta_safety = 1.0;
  double rho_safety = 1.0;
  double theta_raw = 0.0;
  double rho_raw = 0.0;
  double solver_tol = 1e-10;
  std::string theta_path;
  std::string rho_path;
  double gamma_h_pi_variant = 0.0;

  // inputs
  std::string mesh_source;
  std::string config_source;
  double k = 0.0;
  int degree_primal = 0;
  int degree_broken = 0;
  bool symmetric_declared = false;
  std::size_t num_vertices = 0;
  std::size_t num_elements = 0;
  Eigen::Index primal_dofs = 0;
  Eigen::Index broken_dofs = 0;
  double h_star = 0.0;
  double wavespeed_star = 0.0;
  int worst_element = -1;
  std::string regions_json; // echo of the problem regions, compact JSON

  std::vector<std::string> warnings;
  std::optional<Diagnostics> diagnostics;

  std::string verdict() const { return certified ? "certified" : "not-certified"; }
};

/// Everything the pipeline builds, kept alive for checks and diagnostics.
struct CertificationRun
{
  Certificate certificate;
  GardingReport garding;
  std::unique_ptr<FeSystem> system;
  std::unique_ptr<SolutionOperator> op;
  std::unique_ptr<Equilibrator> equilibrator;
  ThetaResult theta;
  RhoResult rho;
};

/// Stage failures are rethrown with the stage name prefixed.
CertificationRun run_certification(const Mesh &mesh, const ProblemSpec &spec,
                                   const CertifyOptions &options = {});

Certificate certify(const Mesh &mesh, const ProblemSpec &spec, const CertifyOptions &options = {});

struct CoercivitySample
{
  double min_value = 0.0;    // min over samples of Re beta(u, u + 2 P_h pi_h u) - factor |||u|||^2
  double min_relative = 0.0; // same divided by |||u|||^2
  double factor = 0.0;
  int samples = 0;
};

/// Random samples u in P_{p+2} with homogeneous Dirichlet trace.
CoercivitySample t_coercivity_check(const CertificationRun &run, int samples, std::uint64_t seed);

/// Pairs (random theta, random w in P_{p+2}) for the residual-control bound.
struct ResidualControlSample
{
  double max_ratio = 0.0; // |k^2 (p w, theta) - beta(w, P_h theta)| / (||R|| ||grad w||_Afrak)
  int samples = 0;
};
ResidualControlSample residual_control_check(const CertificationRun &run, int samples,
                                             std::uint64_t seed);

struct OracleResult
{
  double gamma_ref = 0.0;
  int refinements = 0;
  Eigen::Index dofs = 0;
  double residual = 0.0;
};

/// Smallest singular value of C in E-geometry on the mesh refined
/// `refinements` times.
OracleResult discrete_infsup_oracle(const Mesh &mesh, const ProblemSpec &spec, int refinements,
                                    const CertifyOptions &options = {});

Diagnostics efficiency_diagnostics(const CertificationRun &run, const CertifyOptions &options = {});

struct ContinuityEstimate
{
  double value = 0.0;
  double residual = 0.0; // relative residual of the top Ritz pair
  bool converged = true;
};

/// Largest singular value of C in E-geometry. For Helmholtz-type forms the top
/// of this spectrum is an accumulation point and Lanczos may run out of steps;
/// with options.allow_unconverged the best Ritz value, a lower estimate, is returned.
ContinuityEstimate continuity_estimate(const FeSystem &system, const LanczosOptions &options = {});

/// ||C - C^T|| / ||C|| in the Frobenius norm.
double symmetry_defect(const SparseMatrixc &c);

std::string to_json(const Certificate &cert);
std::string to_json(const Diagnostics &diag);
Certificate certificate_from_json(const std::string &text);

} // namespace infsup
