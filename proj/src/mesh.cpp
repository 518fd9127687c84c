// SPDX-License-Identifier: Apache-2.0
#include "infsup/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

namespace infsup
{

namespace
{

std::string edge_name(int a, int b)
{
  return "(" + std::to_string(a + 1) + "," + std::to_string(b + 1) + ")";
}

double signed_area(const Point &a, const Point &b, const Point &c)
{
  return 0.5 * ((b - a).x() * (c - a).y() - (b - a).y() * (c - a).x());
}

std::uint64_t edge_key(int a, int b)
{
  const auto lo = static_cast<std::uint64_t>(std::min(a, b));
  const auto hi = static_cast<std::uint64_t>(std::max(a, b));
  return (lo << 32) | hi;
}

} // namespace

char tag_letter(BoundaryTag tag)
{
  return tag == BoundaryTag::Dirichlet ? 'D' : 'N';
}

Mesh::Mesh(std::vector<Point> vertices, std::vector<Element> elements,
           std::vector<BoundaryEdge> boundary)
  : vertices_(std::move(vertices)), elements_(std::move(elements)), boundary_(std::move(boundary))
{
  build_topology();
  validate();

  std::vector<int> on_boundary;
  for (const auto &e : edges_)
  {
    if (e.is_boundary())
    {
      on_boundary.push_back(e.vertices[0]);
      on_boundary.push_back(e.vertices[1]);
    }
  }
  std::sort(on_boundary.begin(), on_boundary.end());
  on_boundary.erase(std::unique(on_boundary.begin(), on_boundary.end()), on_boundary.end());
  for (std::size_t i = 0; i < on_boundary.size(); ++i)
  {
    for (std::size_t j = i + 1; j < on_boundary.size(); ++j)
    {
      diameter_ = std::max(diameter_, (vertices_[on_boundary[i]] - vertices_[on_boundary[j]]).norm());
    }
  }
}

void Mesh::build_topology()
{
  const int nv = static_cast<int>(vertices_.size());
  for (std::size_t k = 0; k < elements_.size(); ++k)
  {
    const auto &vs = elements_[k].vertices;
    for (int v : vs)
    {
      if (v < 0 || v >= nv)
      {
        throw ValidationError("element " + std::to_string(k + 1) + " references unknown vertex " +
                              std::to_string(v + 1));
      }
    }
    if (vs[0] == vs[1] || vs[1] == vs[2] || vs[0] == vs[2])
    {
      throw ValidationError("element " + std::to_string(k + 1) + " repeats a vertex");
    }
  }

  std::map<std::uint64_t, int> lookup;
  element_edges_.assign(elements_.size(), {-1, -1, -1});
  vertex_elements_.assign(vertices_.size(), {});
  for (std::size_t k = 0; k < elements_.size(); ++k)
  {
    const auto &vs = elements_[k].vertices;
    for (int i = 0; i < 3; ++i)
    {
      vertex_elements_[vs[i]].push_back(static_cast<int>(k));
      const int a = vs[(i + 1) % 3];
      const int b = vs[(i + 2) % 3];
      auto [it, inserted] = lookup.try_emplace(edge_key(a, b), static_cast<int>(edges_.size()));
      if (inserted)
      {
        Edge e;
        e.vertices = {std::min(a, b), std::max(a, b)};
        e.elements[0] = static_cast<int>(k);
        edges_.push_back(e);
      }
      else
      {
        Edge &e = edges_[it->second];
        if (e.elements[1] >= 0)
        {
          throw ValidationError("edge " + edge_name(a, b) + " is shared by more than two elements");
        }
        e.elements[1] = static_cast<int>(k);
      }
      element_edges_[k][i] = it->second;
    }
  }

  for (const auto &be : boundary_)
  {
    const auto [a, b] = be.vertices;
    if (a < 0 || b < 0 || a >= nv || b >= nv)
    {
      throw ValidationError("boundary edge " + edge_name(a, b) + " references unknown vertex");
    }
    auto it = lookup.find(edge_key(a, b));
    if (it == lookup.end())
    {
      throw ValidationError("boundary edge " + edge_name(a, b) + " is not an element edge");
    }
    Edge &e = edges_[it->second];
    if (!e.is_boundary())
    {
      throw ValidationError("boundary edge " + edge_name(a, b) + " is an interior edge");
    }
    if (e.tag)
    {
      throw ValidationError("boundary edge " + edge_name(a, b) + " is tagged more than once");
    }
    e.tag = be.tag;
  }
}

bool Mesh::edge_aligned(int k, int i) const
{
  const auto &vs = elements_[k].vertices;
  return vs[(i + 1) % 3] < vs[(i + 2) % 3];
}

void Mesh::validate() const
{
  if (elements_.empty())
  {
    throw ValidationError("mesh has no elements");
  }
  for (std::size_t v = 0; v < vertices_.size(); ++v)
  {
    if (vertex_elements_[v].empty())
    {
      throw ValidationError("vertex " + std::to_string(v + 1) + " is not used by any element");
    }
  }

  double total_area = 0.0;
  for (std::size_t k = 0; k < elements_.size(); ++k)
  {
    const auto &vs = elements_[k].vertices;
    const double a = signed_area(vertices_[vs[0]], vertices_[vs[1]], vertices_[vs[2]]);
    const double scale = std::max({(vertices_[vs[1]] - vertices_[vs[0]]).squaredNorm(),
                                   (vertices_[vs[2]] - vertices_[vs[1]]).squaredNorm(),
                                   (vertices_[vs[0]] - vertices_[vs[2]]).squaredNorm()});
    if (!(a > 1e-14 * scale))
    {
      throw ValidationError("element " + std::to_string(k + 1) + " is inverted or degenerate");
    }
    total_area += a;
  }

  // Hanging nodes show up as edges with a single neighbour that carry a
  // vertex in their interior.
  for (const auto &e : edges_)
  {
    if (!e.is_boundary())
    {
      continue;
    }
    const Point &a = vertices_[e.vertices[0]];
    const Point &b = vertices_[e.vertices[1]];
    const Point t = b - a;
    const double len2 = t.squaredNorm();
    for (std::size_t v = 0; v < vertices_.size(); ++v)
    {
      if (static_cast<int>(v) == e.vertices[0] || static_cast<int>(v) == e.vertices[1])
      {
        continue;
      }
      const Point d = vertices_[v] - a;
      const double s = d.dot(t) / len2;
      const double cross = t.x() * d.y() - t.y() * d.x();
      if (s > 1e-12 && s < 1.0 - 1e-12 && std::abs(cross) <= 1e-12 * len2)
      {
        throw ValidationError("hanging node: vertex " + std::to_string(v + 1) + " lies on edge " +
                              edge_name(e.vertices[0], e.vertices[1]));
      }
    }
    if (!e.tag)
    {
      throw ValidationError("boundary edge " + edge_name(e.vertices[0], e.vertices[1]) +
                            " carries no tag");
    }
  }

  // Interior edges are traversed in opposite directions by their neighbours.
  for (std::size_t k = 0; k < elements_.size(); ++k)
  {
    for (int i = 0; i < 3; ++i)
    {
      const Edge &e = edges_[element_edges_[k][i]];
      if (e.is_boundary())
      {
        continue;
      }
      const int other = e.elements[0] == static_cast<int>(k) ? e.elements[1] : e.elements[0];
      int j = 0;
      while (element_edges_[other][j] != element_edges_[k][i])
      {
        ++j;
      }
      if (edge_aligned(static_cast<int>(k), i) == edge_aligned(other, j))
      {
        throw ValidationError("elements " + std::to_string(k + 1) + " and " +
                              std::to_string(other + 1) + " overlap across edge " +
                              edge_name(e.vertices[0], e.vertices[1]));
      }
    }
  }

  // Element areas must add up to the area enclosed by the boundary.
  double enclosed = 0.0;
  for (std::size_t k = 0; k < elements_.size(); ++k)
  {
    for (int i = 0; i < 3; ++i)
    {
      if (!edges_[element_edges_[k][i]].is_boundary())
      {
        continue;
      }
      const auto &vs = elements_[k].vertices;
      const Point &a = vertices_[vs[(i + 1) % 3]];
      const Point &b = vertices_[vs[(i + 2) % 3]];
      enclosed += 0.5 * (a.x() * b.y() - b.x() * a.y());
    }
  }
  if (std::abs(enclosed - total_area) > 1e-12 * total_area)
  {
    throw ValidationError("elements overlap or leave gaps (element area " +
                          std::to_string(total_area) + " vs enclosed area " +
                          std::to_string(enclosed) + ")");
  }

  // Each vertex patch must be connected through edges at the vertex.
  for (std::size_t v = 0; v < vertices_.size(); ++v)
  {
    const auto &patch = vertex_elements_[v];
    std::vector<int> seen{patch.front()};
    std::vector<int> stack{patch.front()};
    while (!stack.empty())
    {
      const int k = stack.back();
      stack.pop_back();
      for (int i = 0; i < 3; ++i)
      {
        const Edge &e = edges_[element_edges_[k][i]];
        if (e.is_boundary() || (e.vertices[0] != static_cast<int>(v) && e.vertices[1] != static_cast<int>(v)))
        {
          continue;
        }
        const int other = e.elements[0] == k ? e.elements[1] : e.elements[0];
        if (std::find(seen.begin(), seen.end(), other) == seen.end())
        {
          seen.push_back(other);
          stack.push_back(other);
        }
      }
    }
    if (seen.size() != patch.size())
    {
      throw ValidationError("vertex " + std::to_string(v + 1) +
                            " has a patch that is not connected through its edges");
    }
  }
}

AffineMap Mesh::affine_map(int k) const
{
  const auto &vs = elements_[k].vertices;
  AffineMap map;
  map.origin = vertices_[vs[0]];
  map.jacobian.col(0) = vertices_[vs[1]] - vertices_[vs[0]];
  map.jacobian.col(1) = vertices_[vs[2]] - vertices_[vs[0]];
  map.det = map.jacobian.determinant();
  map.inverse = map.jacobian.inverse();
  return map;
}

double Mesh::area(int k) const
{
  const auto &vs = elements_[k].vertices;
  return signed_area(vertices_[vs[0]], vertices_[vs[1]], vertices_[vs[2]]);
}

std::vector<int> Mesh::regions() const
{
  std::vector<int> ids;
  for (const auto &e : elements_)
  {
    ids.push_back(e.region);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

Mesh Mesh::scaled(double s) const
{
  auto vs = vertices_;
  for (auto &v : vs)
  {
    v *= s;
  }
  return Mesh(std::move(vs), elements_, boundary_);
}


// ---------------------------------------------------------------------------
// I/O

namespace
{

class TokenStream
{
public:
  explicit TokenStream(std::istream &in)
  {
    std::string line;
    int line_no = 0;
    while (std::getline(in, line))
    {
      ++line_no;
      if (auto hash = line.find('#'); hash != std::string::npos)
      {
        line.erase(hash);
      }
      std::istringstream ls(line);
      std::string tok;
      while (ls >> tok)
      {
        tokens_.push_back({tok, line_no});
      }
    }
  }

  bool done() const { return pos_ >= tokens_.size(); }

  const std::string &next(const char *what)
  {
    if (done())
    {
      throw ParseError(std::string("unexpected end of file, expected ") + what);
    }
    return tokens_[pos_++].first;
  }

  int line() const { return pos_ == 0 ? 0 : tokens_[pos_ - 1].second; }

  long long integer(const char *what)
  {
    const std::string &tok = next(what);
    try
    {
      std::size_t used = 0;
      const long long value = std::stoll(tok, &used);
      if (used == tok.size())
      {
        return value;
      }
    }
    catch (const std::exception &)
    {
    }
    throw ParseError("line " + std::to_string(line()) + ": expected " + what + ", got '" + tok + "'");
  }

  double real(const char *what)
  {
    const std::string &tok = next(what);
    try
    {
      std::size_t used = 0;
      const double value = std::stod(tok, &used);
      if (used == tok.size())
      {
        return value;
      }
    }
    catch (const std::exception &)
    {
    }
    throw ParseError("line " + std::to_string(line()) + ": expected " + what + ", got '" + tok + "'");
  }

  void keyword(const char *word)
  {
    const std::string &tok = next(word);
    if (tok != word)
    {
      throw ParseError("line " + std::to_string(line()) + ": expected '" + word + "', got '" + tok +
                       "'");
    }
  }

private:
  std::vector<std::pair<std::string, int>> tokens_;
  std::size_t pos_ = 0;
};

void expect_id(TokenStream &ts, long long expected, const char *section)
{
  const long long id = ts.integer("id");
  if (id != expected)
  {
    throw ParseError("line " + std::to_string(ts.line()) + ": " + section + " ids must be 1-based and contiguous (expected " +
                     std::to_string(expected) + ", got " + std::to_string(id) + ")");
  }
}

int vertex_index(TokenStream &ts, long long n)
{
  const long long v = ts.integer("vertex id");
  if (v < 1 || v > n)
  {
    throw ParseError("line " + std::to_string(ts.line()) + ": vertex id " + std::to_string(v) +
                     " out of range");
  }
  return static_cast<int>(v - 1);
}

} // namespace

Mesh read_mesh(std::istream &in)
{
  TokenStream ts(in);
  ts.keyword("nodes");
  const long long n = ts.integer("node count");
  if (n < 3)
  {
    throw ParseError("a mesh needs at least three nodes");
  }
  std::vector<Point> vertices(static_cast<std::size_t>(n));
  for (long long i = 0; i < n; ++i)
  {
    expect_id(ts, i + 1, "node");
    const double x = ts.real("x coordinate");
    const double y = ts.real("y coordinate");
    vertices[i] = Point(x, y);
  }

  ts.keyword("elements");
  const long long m = ts.integer("element count");
  if (m < 1)
  {
    throw ParseError("a mesh needs at least one element");
  }
  std::vector<Element> elements(static_cast<std::size_t>(m));
  for (long long k = 0; k < m; ++k)
  {
    expect_id(ts, k + 1, "element");
    for (int j = 0; j < 3; ++j)
    {
      elements[k].vertices[j] = vertex_index(ts, n);
    }
    elements[k].region = static_cast<int>(ts.integer("region id"));
  }

  ts.keyword("boundary");
  const long long b = ts.integer("boundary edge count");
  if (b < 0)
  {
    throw ParseError("negative boundary edge count");
  }
  std::vector<BoundaryEdge> boundary(static_cast<std::size_t>(b));
  for (long long i = 0; i < b; ++i)
  {
    expect_id(ts, i + 1, "boundary");
    boundary[i].vertices[0] = vertex_index(ts, n);
    boundary[i].vertices[1] = vertex_index(ts, n);
    const std::string &tag = ts.next("boundary tag");
    if (tag == "D")
    {
      boundary[i].tag = BoundaryTag::Dirichlet;
    }
    else if (tag == "N")
    {
      boundary[i].tag = BoundaryTag::Neumann;
    }
    else
    {
      throw ParseError("line " + std::to_string(ts.line()) + ": boundary tag must be D or N, got '" +
                       tag + "'");
    }
  }
  if (!ts.done())
  {
    throw ParseError("trailing content after boundary section: '" + ts.next("") + "'");
  }
  return Mesh(std::move(vertices), std::move(elements), std::move(boundary));
}

Mesh load_mesh(const std::filesystem::path &path)
{
  std::ifstream in(path);
  if (!in)
  {
    throw ParseError("cannot open mesh file " + path.string());
  }
  try
  {
    return read_mesh(in);
  }
  catch (const ParseError &e)
  {
    throw ParseError(path.string() + ": " + e.what());
  }
  catch (const ValidationError &e)
  {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void write_mesh(std::ostream &out, const Mesh &mesh)
{
  char buf[128];
  out << "nodes " << mesh.num_vertices() << '\n';
  for (std::size_t i = 0; i < mesh.num_vertices(); ++i)
  {
    const Point &p = mesh.vertices()[i];
    std::snprintf(buf, sizeof(buf), "%zu %.17g %.17g\n", i + 1, p.x(), p.y());
    out << buf;
  }
  out << "elements " << mesh.num_elements() << '\n';
  for (std::size_t k = 0; k < mesh.num_elements(); ++k)
  {
    const auto &e = mesh.elements()[k];
    out << k + 1 << ' ' << e.vertices[0] + 1 << ' ' << e.vertices[1] + 1 << ' '
        << e.vertices[2] + 1 << ' ' << e.region << '\n';
  }
  out << "boundary " << mesh.boundary().size() << '\n';
  for (std::size_t i = 0; i < mesh.boundary().size(); ++i)
  {
    const auto &b = mesh.boundary()[i];
    out << i + 1 << ' ' << b.vertices[0] + 1 << ' ' << b.vertices[1] + 1 << ' '
        << tag_letter(b.tag) << '\n';
  }
}

void save_mesh(const std::filesystem::path &path, const Mesh &mesh)
{
  std::ofstream out(path);
  if (!out)
  {
    throw Error("cannot write mesh file " + path.string());
  }
  write_mesh(out, mesh);
}

// ---------------------------------------------------------------------------
// Factories and derived data

Mesh generate_unit_square(int n, bool dirichlet_only)
{
  if (n < 1)
  {
    throw ValidationError("unit square generator needs n >= 1");
  }
  const auto id = [n](int i, int j) { return j * (n + 1) + i; };
  std::vector<Point> vertices;
  vertices.reserve(static_cast<std::size_t>((n + 1) * (n + 1)));
  for (int j = 0; j <= n; ++j)
  {
    for (int i = 0; i <= n; ++i)
    {
      vertices.emplace_back(static_cast<double>(i) / n, static_cast<double>(j) / n);
    }
  }
  std::vector<Element> elements;
  elements.reserve(static_cast<std::size_t>(2 * n * n));
  for (int j = 0; j < n; ++j)
  {
    for (int i = 0; i < n; ++i)
    {
      const int v00 = id(i, j), v10 = id(i + 1, j), v01 = id(i, j + 1), v11 = id(i + 1, j + 1);
      if ((i + j) % 2 == 0)
      {
        elements.push_back({{v00, v10, v11}, 1});
        elements.push_back({{v00, v11, v01}, 1});
      }
      else
      {
        elements.push_back({{v00, v10, v01}, 1});
        elements.push_back({{v10, v11, v01}, 1});
      }
    }
  }
  const BoundaryTag bottom = dirichlet_only ? BoundaryTag::Dirichlet : BoundaryTag::Neumann;
  std::vector<BoundaryEdge> boundary;
  for (int i = 0; i < n; ++i)
  {
    boundary.push_back({{id(i, 0), id(i + 1, 0)}, bottom});
  }
  for (int j = 0; j < n; ++j)
  {
    boundary.push_back({{id(n, j), id(n, j + 1)}, BoundaryTag::Dirichlet});
  }
  for (int i = n; i > 0; --i)
  {
    boundary.push_back({{id(i, n), id(i - 1, n)}, BoundaryTag::Dirichlet});
  }
  for (int j = n; j > 0; --j)
  {
    boundary.push_back({{id(0, j), id(0, j - 1)}, BoundaryTag::Dirichlet});
  }
  return Mesh(std::move(vertices), std::move(elements), std::move(boundary));
}

ShapeData shape_data(const Mesh &mesh)
{
  ShapeData data;
  data.elements.reserve(mesh.num_elements());
  data.kappa = 1.0;
  for (std::size_t k = 0; k < mesh.num_elements(); ++k)
  {
    const auto &vs = mesh.elements()[k].vertices;
    const auto &xs = mesh.vertices();
    const double l0 = (xs[vs[1]] - xs[vs[2]]).norm();
    const double l1 = (xs[vs[2]] - xs[vs[0]]).norm();
    const double l2 = (xs[vs[0]] - xs[vs[1]]).norm();
    ElementGeometry g;
    g.h = std::max({l0, l1, l2});
    g.rho = 4.0 * mesh.area(static_cast<int>(k)) / (l0 + l1 + l2);
    g.kappa = g.h / g.rho;
    data.kappa = std::max(data.kappa, g.kappa);
    data.elements.push_back(g);
  }
  return data;
}

std::vector<VertexPatch> build_patches(const Mesh &mesh)
{
  std::vector<VertexPatch> patches(mesh.num_vertices());
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v)
  {
    VertexPatch &patch = patches[v];
    patch.vertex = static_cast<int>(v);
    patch.elements = mesh.vertex_elements(static_cast<int>(v));
    std::sort(patch.elements.begin(), patch.elements.end());
    std::vector<int> patch_vertices;
    for (int k : patch.elements)
    {
      for (int i = 0; i < 3; ++i)
      {
        patch_vertices.push_back(mesh.elements()[k].vertices[i]);
        const int e = mesh.element_edge(k, i);
        const Edge &edge = mesh.edges()[e];
        if (edge.vertices[0] != patch.vertex && edge.vertices[1] != patch.vertex)
        {
          continue;
        }
        if (!edge.is_boundary())
        {
          patch.interior_edges.push_back(e);
        }
        else if (*edge.tag == BoundaryTag::Dirichlet)
        {
          patch.dirichlet_edges.push_back(e);
        }
        else
        {
          patch.neumann_edges.push_back(e);
        }
      }
    }
    for (auto *list : {&patch.interior_edges, &patch.dirichlet_edges, &patch.neumann_edges})
    {
      std::sort(list->begin(), list->end());
      list->erase(std::unique(list->begin(), list->end()), list->end());
    }
    std::sort(patch_vertices.begin(), patch_vertices.end());
    patch_vertices.erase(std::unique(patch_vertices.begin(), patch_vertices.end()),
                         patch_vertices.end());
    for (std::size_t i = 0; i < patch_vertices.size(); ++i)
    {
      for (std::size_t j = i + 1; j < patch_vertices.size(); ++j)
      {
        patch.diameter = std::max(
            patch.diameter, (mesh.vertices()[patch_vertices[i]] - mesh.vertices()[patch_vertices[j]]).norm());
      }
    }
    patch.needs_mean_constraint = patch.dirichlet_edges.empty();
  }
  return patches;
}

Refinement refine_uniform_tracked(const Mesh &mesh)
{
  const int nv = static_cast<int>(mesh.num_vertices());
  std::vector<Point> vertices = mesh.vertices();
  vertices.reserve(mesh.num_vertices() + mesh.edges().size());
  for (const auto &e : mesh.edges())
  {
    vertices.push_back(0.5 * (mesh.vertices()[e.vertices[0]] + mesh.vertices()[e.vertices[1]]));
  }
  Refinement out;
  std::vector<Element> elements;
  elements.reserve(4 * mesh.num_elements());
  out.parent.reserve(4 * mesh.num_elements());
  for (std::size_t k = 0; k < mesh.num_elements(); ++k)
  {
    const auto &el = mesh.elements()[k];
    const auto &v = el.vertices;
    const int kk = static_cast<int>(k);
    const int m0 = nv + mesh.element_edge(kk, 0);
    const int m1 = nv + mesh.element_edge(kk, 1);
    const int m2 = nv + mesh.element_edge(kk, 2);
    elements.push_back({{v[0], m2, m1}, el.region});
    elements.push_back({{m2, v[1], m0}, el.region});
    elements.push_back({{m1, m0, v[2]}, el.region});
    elements.push_back({{m0, m1, m2}, el.region});
    out.parent.insert(out.parent.end(), 4, kk);
  }
  std::map<std::uint64_t, int> lookup;
  for (std::size_t e = 0; e < mesh.edges().size(); ++e)
  {
    lookup[edge_key(mesh.edges()[e].vertices[0], mesh.edges()[e].vertices[1])] = static_cast<int>(e);
  }
  std::vector<BoundaryEdge> boundary;
  boundary.reserve(2 * mesh.boundary().size());
  for (const auto &b : mesh.boundary())
  {
    const int mid = nv + lookup.at(edge_key(b.vertices[0], b.vertices[1]));
    boundary.push_back({{b.vertices[0], mid}, b.tag});
    boundary.push_back({{mid, b.vertices[1]}, b.tag});
  }
  out.mesh = Mesh(std::move(vertices), std::move(elements), std::move(boundary));
  return out;
}

Mesh refine_uniform(const Mesh &mesh)
{
  return refine_uniform_tracked(mesh).mesh;
}

} // namespace infsup
