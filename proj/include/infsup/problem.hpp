// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "infsup/common.hpp"
#include "infsup/mesh.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace infsup
{

/// Constant coefficients of one region:
/// beta(u, v) = (-k^2 d u + i k c.grad u, v) + (i k b u + A grad u, grad v).
struct RegionCoefficients
{
  Eigen::Matrix2cd A = Eigen::Matrix2cd::Identity();
  Eigen::Vector2cd b = Eigen::Vector2cd::Zero();
  Eigen::Vector2cd c = Eigen::Vector2cd::Zero();
  Complex d = 1.0;
};

/// Weights of the Garding inequality on one region.
struct GardingWeights
{
  double m = 1.0;
  double p = 1.0;
  Eigen::Matrix2d afrak = Eigen::Matrix2d::Identity();

  double afrak_min() const;
  double afrak_max() const;
};

struct ProblemSpec
{
  double k = 1.0;
  int degree_primal = 1;
  int degree_broken = 0;
  bool symmetric = false; // declared complex-symmetric form
  std::map<int, RegionCoefficients> coefficients;
  std::map<int, GardingWeights> weights;
  std::map<int, bool> default_weights; // region -> weights came from the Helmholtz rule

  const RegionCoefficients &coefficients_of(int region) const;
  const GardingWeights &weights_of(int region) const;

  /// Checks ranges, weight invariants and that every mesh region is covered.
  void validate(const Mesh &mesh) const;
};

/// m = p = Re d, Afrak = sym(Re A). Throws ConfigError when not applicable.
GardingWeights helmholtz_default_weights(const RegionCoefficients &coefficients);

/// sqrt(p / largest eigenvalue of Afrak); zero when p = 0.
double wavespeed(const GardingWeights &weights);

struct WorstCell
{
  double h = 0.0;
  double wavespeed = 0.0;
  int element = -1;
};

/// Element maximising h_K / wavespeed_K among elements with p_K > 0.
WorstCell worst_cell(const Mesh &mesh, const ProblemSpec &spec);

/// Hermitian 3x3 matrix, in the variables (u, d1 u, d2 u), of
/// Re[beta integrand] - (k^2 m |u|^2 + grad u . Afrak grad u) + 2 k^2 p |u|^2.
Eigen::Matrix3cd garding_matrix(const RegionCoefficients &coefficients,
                                const GardingWeights &weights, double k);

struct GardingReport
{
  std::vector<double> margins; // per element minimum eigenvalue
  double min_margin = 0.0;
  bool passed = true;
  std::vector<int> p_exceeds_m; // elements where p_K > m_K (warning only)
};

GardingReport garding_check(const Mesh &mesh, const ProblemSpec &spec, double tol = 1e-10);

/// max_K sqrt(p_K / m_K).
double kfrak(const Mesh &mesh, const ProblemSpec &spec);

struct PatchConstants
{
  double wavespeed = 0.0;
  double contrast = 1.0;
};

PatchConstants patch_constants(const VertexPatch &patch, const Mesh &mesh,
                               const ProblemSpec &spec);

/// JSON configuration. Complex values are numbers or [re, im] pairs.
ProblemSpec parse_problem(const std::string &text);
ProblemSpec load_problem(const std::filesystem::path &path);

} // namespace infsup
