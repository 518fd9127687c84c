// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "infsup/operator.hpp"

#include <iosfwd>
#include <memory>
#include <vector>

namespace infsup
{

/// Localised data of one vertex patch, stored per patch element as
/// coefficients in L2(K)-orthonormal bases:
///   divergence: P_{p+2},  target: two components in P_{p+1}.
struct PatchData
{
  int vertex = -1;
  std::vector<int> elements;
  std::vector<VectorXc> divergence;
  std::vector<VectorXc> target_x;
  std::vector<VectorXc> target_y;

  /// (1, divergence) over the patch.
  Complex mean(const Mesh &mesh) const;
  /// L2 norm of the divergence data over the patch.
  double divergence_norm() const;
};

/// Degrees of freedom of the patch flux space: normal moments on the free
/// edges through the vertex (interior and Dirichlet ones) and element
/// interior moments. For every patch element, each local Raviart-Thomas DOF
/// maps to (patch index or -1, sign).
struct PatchSpace
{
  int vertex = -1;
  std::vector<int> elements;
  int num_flux = 0;
  int num_multipliers = 0; // elementwise P_{p+2}, plus one when mean-constrained
  bool mean_constraint = false;
  std::vector<std::vector<std::pair<int, double>>> local_to_patch;
};

/// Saddle-point system of one patch: minimise ||sigma + target||_{Afrak^-1}
/// subject to div sigma = divergence. Rows/cols: flux DOFs then multipliers.
struct PatchSystem
{
  PatchSpace space;
  Eigen::MatrixXd mass;       // (Afrak^-1 sigma_j, sigma_i)
  Eigen::MatrixXd divergence; // (div sigma_j, w_i), w orthonormal per element
  Eigen::VectorXd mean;       // (1, w_i) when mean-constrained
  Eigen::MatrixXd target;     // flux rows x (target coefficients) -> (Afrak^-1 t, sigma_i)
};

struct PatchSolution
{
  VectorXc flux;        // patch flux DOFs
  VectorXc multipliers; // elementwise multipliers (and the mean one, last)
  std::vector<VectorXc> sigma; // per patch element, local RT coefficients
};

/// Broken Raviart-Thomas field of order p+2 stored as local coefficients per
/// element (Piola-mapped reference basis) together with its inputs.
struct FluxReconstruction
{
  VectorXc theta;
  VectorXc u;
  std::vector<VectorXc> sigma;
};

struct EquilibrationCheck
{
  double max_relative_residual = 0.0; // max_K ||div sigma - rhs||_K / ||rhs||_K
  double max_residual = 0.0;
  double rhs_norm = 0.0;
};

struct JumpCheck
{
  double max_interior_jump = 0.0; // L2 norm of the normal jump, max over edges
  double max_neumann_trace = 0.0;
  double flux_scale = 0.0;        // max L2 norm of the normal trace
};

struct RhoResult
{
  double value = 0.0;
  double raw = 0.0;
  double safety = 1.0;
  VectorXc maximizer;
  double residual = 0.0;
  double hermitian_defect = 0.0;
  bool dense = false;
  const char *normalization = "k ||theta||_p = 1";
};

/// Flux reconstruction and residual machinery. Construction precomputes, for
/// every patch, the linear map from local inputs (theta and u_h on the patch
/// elements) to the patch flux.
class Equilibrator
{
public:
  explicit Equilibrator(const SolutionOperator &op, int threads = 1);
  ~Equilibrator();

  const SolutionOperator &solution_operator() const { return *op_; }
  const FeSystem &system() const { return op_->system(); }
  const std::vector<VertexPatch> &patches() const { return patches_; }
  int flux_order() const;

  PatchData patch_data(int vertex, const VectorXc &theta, const VectorXc &u) const;
  PatchSystem patch_system(int vertex) const;
  PatchSolution solve_patch(int vertex, const PatchData &data) const;

  FluxReconstruction reconstruct(const VectorXc &theta) const;
  /// Same, given u = P_h(theta) already.
  FluxReconstruction reconstruct(const VectorXc &theta, const VectorXc &u) const;

  EquilibrationCheck check_equilibration(const FluxReconstruction &flux) const;
  JumpCheck check_normal_jumps(const FluxReconstruction &flux) const;

  /// Physical flux value at x inside element k.
  Eigen::Vector2cd flux_value(const FluxReconstruction &flux, int k, const Point &x) const;

  /// Coefficients of Afrak^{-1/2} R_h(theta) per element in the
  /// L2(K)-orthonormal vector basis of degree p+3, concatenated; its
  /// Euclidean norm is ||R_h(theta)||_{Afrak^-1}.
  VectorXc residual(const VectorXc &theta) const;
  VectorXc residual(const FluxReconstruction &flux) const;
  /// Adjoint of residual(theta) in Euclidean coefficient inner products.
  VectorXc residual_adjoint(const VectorXc &y) const;
  Eigen::Index residual_size() const;

  /// Plain-text dump: per element, the flux in the L2(K)-orthonormal
  /// modal basis of degree p+3 (ascending degree), x components then y.
  void write_flux(std::ostream &out, const FluxReconstruction &flux) const;

private:
  struct Impl;
  const SolutionOperator *op_;
  std::vector<VertexPatch> patches_;
  std::unique_ptr<Impl> impl_;
};

/// max ||R_h(theta)||_{Afrak^-1} subject to k ||theta||_p = 1.
RhoResult compute_rho(const Equilibrator &eq, const SpectralOptions &options = {},
                      Eigen::Index dense_threshold = 256);

} // namespace infsup
