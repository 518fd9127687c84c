// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "infsup/common.hpp"

#include <array>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace infsup
{

enum class BoundaryTag
{
  Dirichlet,
  Neumann
};

char tag_letter(BoundaryTag tag);

struct Element
{
  std::array<int, 3> vertices;
  int region = 0;
};

struct BoundaryEdge
{
  std::array<int, 2> vertices;
  BoundaryTag tag = BoundaryTag::Dirichlet;
};

/// A mesh edge. Vertices are stored in ascending order, which fixes the
/// global orientation used for normal traces (normal = tangent rotated
/// clockwise).
struct Edge
{
  std::array<int, 2> vertices;
  std::array<int, 2> elements{-1, -1};
  std::optional<BoundaryTag> tag;

  bool is_boundary() const { return elements[1] < 0; }
};

/// Affine map x = origin + jacobian * xi from the reference triangle
/// (0,0), (1,0), (0,1).
struct AffineMap
{
  Point origin;
  Eigen::Matrix2d jacobian;
  Eigen::Matrix2d inverse;
  double det = 0.0;

  Point operator()(const Point &xi) const { return origin + jacobian * xi; }
  Point to_reference(const Point &x) const { return inverse * (x - origin); }
};

struct ElementGeometry
{
  double h = 0.0;   // longest edge
  double rho = 0.0; // incircle diameter
  double kappa = 1.0;
};

struct ShapeData
{
  std::vector<ElementGeometry> elements;
  double kappa = 1.0;
};

/// Elements around a vertex together with the boundary bookkeeping of the
/// local flux problem. The normal trace of a patch flux is unconstrained on
/// Dirichlet edges through the vertex and vanishes on the rest of the patch
/// boundary (Neumann edges through the vertex and all opposite edges).
struct VertexPatch
{
  int vertex = -1;
  std::vector<int> elements;
  std::vector<int> interior_edges;
  std::vector<int> dirichlet_edges;
  std::vector<int> neumann_edges;
  double diameter = 0.0;
  bool needs_mean_constraint = true;
};

class Mesh
{
public:
  Mesh() = default;

  /// Builds the topology and validates every structural invariant; throws
  /// ValidationError naming the offending entity.
  Mesh(std::vector<Point> vertices, std::vector<Element> elements,
       std::vector<BoundaryEdge> boundary);

  const std::vector<Point> &vertices() const { return vertices_; }
  const std::vector<Element> &elements() const { return elements_; }
  const std::vector<BoundaryEdge> &boundary() const { return boundary_; }
  const std::vector<Edge> &edges() const { return edges_; }

  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_elements() const { return elements_.size(); }

  /// Global edge opposite local vertex i of element k.
  int element_edge(int k, int i) const { return element_edges_[k][i]; }

  /// True when local edge i of k, traversed counter-clockwise, runs from the
  /// lower to the higher global vertex id.
  bool edge_aligned(int k, int i) const;

  const std::vector<int> &vertex_elements(int v) const { return vertex_elements_[v]; }

  AffineMap affine_map(int k) const;
  double area(int k) const;
  double domain_diameter() const { return diameter_; }

  /// Distinct region ids in ascending order.
  std::vector<int> regions() const;

  /// Scale all coordinates by s > 0.
  Mesh scaled(double s) const;

private:
  void build_topology();
  void validate() const;

  std::vector<Point> vertices_;
  std::vector<Element> elements_;
  std::vector<BoundaryEdge> boundary_;
  std::vector<Edge> edges_;
  std::vector<std::array<int, 3>> element_edges_;
  std::vector<std::vector<int>> vertex_elements_;
  double diameter_ = 0.0;
};

Mesh read_mesh(std::istream &in);
Mesh load_mesh(const std::filesystem::path &path);
void write_mesh(std::ostream &out, const Mesh &mesh);
void save_mesh(const std::filesystem::path &path, const Mesh &mesh);

/// Structured triangulation of (0,1)^2 with n x n cells, each split along a
/// diagonal whose direction alternates in a checkerboard pattern. Single
/// region 1. All boundary edges are Dirichlet unless dirichlet_only is false,
/// in which case the bottom edge (y = 0) is Neumann.
Mesh generate_unit_square(int n, bool dirichlet_only = true);

ShapeData shape_data(const Mesh &mesh);

std::vector<VertexPatch> build_patches(const Mesh &mesh);

struct Refinement
{
  Mesh mesh;
  std::vector<int> parent; // child element -> parent element
};

/// Red refinement: every triangle is split into four by its edge midpoints.
Refinement refine_uniform_tracked(const Mesh &mesh);
Mesh refine_uniform(const Mesh &mesh);

} // namespace infsup
