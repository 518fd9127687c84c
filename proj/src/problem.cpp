// SPDX-License-Identifier: Apache-2.0
#include "infsup/problem.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace infsup
{

using nlohmann::json;

double GardingWeights::afrak_min() const
{
  return Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(afrak, Eigen::EigenvaluesOnly).eigenvalues()(0);
}

double GardingWeights::afrak_max() const
{
  return Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(afrak, Eigen::EigenvaluesOnly).eigenvalues()(1);
}

const RegionCoefficients &ProblemSpec::coefficients_of(int region) const
{
  auto it = coefficients.find(region);
  if (it == coefficients.end())
  {
    throw ConfigError("no coefficients for region " + std::to_string(region));
  }
  return it->second;
}

const GardingWeights &ProblemSpec::weights_of(int region) const
{
  auto it = weights.find(region);
  if (it == weights.end())
  {
    throw ConfigError("no Garding weights for region " + std::to_string(region));
  }
  return it->second;
}

void ProblemSpec::validate(const Mesh &mesh) const
{
  if (!(k > 0.0) || !std::isfinite(k))
  {
    throw ConfigError("wavenumber k must be positive and finite");
  }
  if (degree_primal < 1 || degree_primal > 4)
  {
    throw ConfigError("degree_primal must lie in [1, 4]");
  }
  if (degree_broken < 0 || degree_broken > degree_primal + 1)
  {
    throw ConfigError("degree_broken must lie in [0, degree_primal + 1]");
  }
  for (const auto &[region, c] : coefficients)
  {
    if (!c.A.allFinite() || !c.b.allFinite() || !c.c.allFinite() || !std::isfinite(c.d.real()) ||
        !std::isfinite(c.d.imag()))
    {
      throw ConfigError("non-finite coefficient in region " + std::to_string(region));
    }
  }
  bool any_p = false;
  for (const auto &[region, w] : weights)
  {
    const std::string where = " in region " + std::to_string(region);
    if (!(w.m > 0.0))
    {
      throw ConfigError("weight m must be positive" + where);
    }
    if (!(w.p >= 0.0))
    {
      throw ConfigError("weight p must be non-negative" + where);
    }
    if ((w.afrak - w.afrak.transpose()).norm() > 1e-14 * w.afrak.norm() || !(w.afrak_min() > 0.0))
    {
      throw ConfigError("Afrak must be symmetric positive definite" + where);
    }
  }
  for (int region : mesh.regions())
  {
    coefficients_of(region);
    if (weights_of(region).p > 0.0)
    {
      any_p = true;
    }
  }
  if (!any_p)
  {
    throw ConfigError("weight p vanishes on every region of the mesh");
  }
}

GardingWeights helmholtz_default_weights(const RegionCoefficients &coefficients)
{
  GardingWeights w;
  const double d = coefficients.d.real();
  if (!(d > 0.0))
  {
    throw ConfigError("Helmholtz default weights need Re d > 0");
  }
  const Eigen::Matrix2d re = coefficients.A.real();
  w.afrak = 0.5 * (re + re.transpose());
  if (!(w.afrak_min() > 0.0))
  {
    throw ConfigError("Helmholtz default weights need sym(Re A) positive definite");
  }
  w.m = d;
  w.p = d;
  return w;
}

double wavespeed(const GardingWeights &weights)
{
  if (weights.p <= 0.0)
  {
    return 0.0;
  }
  return std::sqrt(weights.p / weights.afrak_max());
}

WorstCell worst_cell(const Mesh &mesh, const ProblemSpec &spec)
{
  const ShapeData shape = shape_data(mesh);
  WorstCell worst;
  double ratio = -1.0;
  for (std::size_t k = 0; k < mesh.num_elements(); ++k)
  {
    const GardingWeights &w = spec.weights_of(mesh.elements()[k].region);
    if (w.p <= 0.0)
    {
      continue;
    }
    const double v = wavespeed(w);
    const double h = shape.elements[k].h;
    if (h / v > ratio)
    {
      ratio = h / v;
      worst = {h, v, static_cast<int>(k)};
    }
  }
  if (worst.element < 0)
  {
    throw ConfigError("weight p vanishes on every element");
  }
  return worst;
}

Eigen::Matrix3cd garding_matrix(const RegionCoefficients &cf, const GardingWeights &w, double k)
{
  const Complex ik = I_unit * k;
  Eigen::Matrix3cd m;
  m << -k * k * cf.d, ik * cf.c(0), ik * cf.c(1),
       ik * cf.b(0), cf.A(0, 0), cf.A(0, 1),
       ik * cf.b(1), cf.A(1, 0), cf.A(1, 1);
  Eigen::Matrix3cd h = 0.5 * (m + m.adjoint());
  h(0, 0) += k * k * (2.0 * w.p - w.m);
  h.bottomRightCorner<2, 2>() -= w.afrak.cast<Complex>();
  return h;
}

GardingReport garding_check(const Mesh &mesh, const ProblemSpec &spec, double tol)
{
  GardingReport report;
  report.margins.resize(mesh.num_elements());
  std::map<int, double> region_margin;
  for (int region : mesh.regions())
  {
    const auto &cf = spec.coefficients_of(region);
    const auto &w = spec.weights_of(region);
    const Eigen::Matrix3cd h = garding_matrix(cf, w, spec.k);
    region_margin[region] =
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3cd>(h, Eigen::EigenvaluesOnly).eigenvalues()(0);
  }
  report.min_margin = std::numeric_limits<double>::infinity();
  for (std::size_t e = 0; e < mesh.num_elements(); ++e)
  {
    const int region = mesh.elements()[e].region;
    const auto &cf = spec.coefficients_of(region);
    const auto &w = spec.weights_of(region);
    const double margin = region_margin[region];
    report.margins[e] = margin;
    report.min_margin = std::min(report.min_margin, margin);
    const double scale =
        std::max({1.0, spec.k * spec.k * std::abs(cf.d), cf.A.norm(), spec.k * cf.b.norm(),
                  spec.k * cf.c.norm(), spec.k * spec.k * w.m, w.afrak.norm()});
    if (margin < -tol * scale)
    {
      report.passed = false;
    }
    if (w.p > w.m)
    {
      report.p_exceeds_m.push_back(static_cast<int>(e));
    }
  }
  return report;
}

double kfrak(const Mesh &mesh, const ProblemSpec &spec)
{
  double value = 0.0;
  for (const auto &el : mesh.elements())
  {
    const auto &w = spec.weights_of(el.region);
    value = std::max(value, std::sqrt(w.p / w.m));
  }
  return value;
}

PatchConstants patch_constants(const VertexPatch &patch, const Mesh &mesh, const ProblemSpec &spec)
{
  double min_p = std::numeric_limits<double>::infinity();
  double max_sharp = 0.0;
  double min_flat = std::numeric_limits<double>::infinity();
  for (int e : patch.elements)
  {
    const auto &w = spec.weights_of(mesh.elements()[e].region);
    min_p = std::min(min_p, w.p);
    max_sharp = std::max(max_sharp, w.afrak_max());
    min_flat = std::min(min_flat, w.afrak_min());
  }
  return {std::sqrt(min_p / max_sharp), std::sqrt(max_sharp / min_flat)};
}

// ---------------------------------------------------------------------------

namespace
{

Complex read_complex(const json &value, const std::string &what)
{
  if (value.is_number())
  {
    return {value.get<double>(), 0.0};
  }
  if (value.is_array() && value.size() == 2 && value[0].is_number() && value[1].is_number())
  {
    return {value[0].get<double>(), value[1].get<double>()};
  }
  throw ConfigError(what + ": expected a number or an [re, im] pair");
}

Eigen::Vector2cd read_vector(const json &value, const std::string &what)
{
  if (!value.is_array() || value.size() != 2)
  {
    throw ConfigError(what + ": expected a 2-vector");
  }
  return {read_complex(value[0], what), read_complex(value[1], what)};
}

Eigen::Matrix2cd read_matrix(const json &value, const std::string &what)
{
  if (value.is_number())
  {
    return read_complex(value, what) * Eigen::Matrix2cd::Identity();
  }
  if (!value.is_array() || value.size() != 2 || !value[0].is_array())
  {
    throw ConfigError(what + ": expected a 2x2 matrix [[a11, a12], [a21, a22]]");
  }
  Eigen::Matrix2cd m;
  for (int i = 0; i < 2; ++i)
  {
    const Eigen::Vector2cd row = read_vector(value[i], what);
    m(i, 0) = row(0);
    m(i, 1) = row(1);
  }
  return m;
}

double read_real(const json &value, const std::string &what)
{
  if (!value.is_number())
  {
    throw ConfigError(what + ": expected a real number");
  }
  return value.get<double>();
}

} // namespace

namespace
{
ProblemSpec problem_from_document(json doc);
}

ProblemSpec parse_problem(const std::string &text)
{
  json doc;
  try
  {
    doc = json::parse(text, nullptr, true, true);
  }
  catch (const json::parse_error &e)
  {
    throw ParseError(std::string("config: ") + e.what());
  }
  if (!doc.is_object())
  {
    throw ConfigError("config: top level must be an object");
  }
  try
  {
    return problem_from_document(doc);
  }
  catch (const json::exception &e)
  {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

namespace
{

ProblemSpec problem_from_document(json doc)
{
  ProblemSpec spec;
  if (doc.contains("k") == doc.contains("k_squared"))
  {
    throw ConfigError("config: give exactly one of 'k' and 'k_squared'");
  }
  if (doc.contains("k"))
  {
    spec.k = read_real(doc["k"], "k");
  }
  else
  {
    const double k2 = read_real(doc["k_squared"], "k_squared");
    if (!(k2 > 0.0))
    {
      throw ConfigError("config: k_squared must be positive");
    }
    spec.k = std::sqrt(k2);
  }
  if (doc.contains("degree_primal"))
  {
    spec.degree_primal = doc["degree_primal"].get<int>();
  }
  if (doc.contains("degree_broken"))
  {
    spec.degree_broken = doc["degree_broken"].get<int>();
  }
  if (doc.contains("symmetric"))
  {
    spec.symmetric = doc["symmetric"].get<bool>();
  }
  if (!doc.contains("regions") || !doc["regions"].is_object() || doc["regions"].empty())
  {
    throw ConfigError("config: 'regions' must be a non-empty object");
  }
  for (const auto &[key, entry] : doc["regions"].items())
  {
    int region = 0;
    try
    {
      std::size_t used = 0;
      region = std::stoi(key, &used);
      if (used != key.size())
      {
        throw std::invalid_argument(key);
      }
    }
    catch (const std::exception &)
    {
      throw ConfigError("config: region key '" + key + "' is not an integer");
    }
    const std::string where = "regions." + key;
    RegionCoefficients cf;
    if (entry.contains("A"))
    {
      cf.A = read_matrix(entry["A"], where + ".A");
    }
    if (entry.contains("b"))
    {
      cf.b = read_vector(entry["b"], where + ".b");
    }
    if (entry.contains("c"))
    {
      cf.c = read_vector(entry["c"], where + ".c");
    }
    if (entry.contains("d"))
    {
      cf.d = read_complex(entry["d"], where + ".d");
    }
    spec.coefficients[region] = cf;

    const json weights = entry.value("weights", json("helmholtz-default"));
    if (weights.is_string())
    {
      if (weights.get<std::string>() != "helmholtz-default")
      {
        throw ConfigError(where + ".weights: unknown rule '" + weights.get<std::string>() + "'");
      }
      try
      {
        spec.weights[region] = helmholtz_default_weights(cf);
      }
      catch (const ConfigError &e)
      {
        throw ConfigError(where + ".weights: " + e.what());
      }
      spec.default_weights[region] = true;
    }
    else if (weights.is_object())
    {
      GardingWeights w;
      w.m = read_real(weights.at("m"), where + ".weights.m");
      w.p = read_real(weights.at("p"), where + ".weights.p");
      if (weights.contains("Afrak"))
      {
        const Eigen::Matrix2cd a = read_matrix(weights["Afrak"], where + ".weights.Afrak");
        if (a.imag().norm() != 0.0)
        {
          throw ConfigError(where + ".weights.Afrak must be real");
        }
        w.afrak = a.real();
      }
      spec.weights[region] = w;
      spec.default_weights[region] = false;
    }
    else
    {
      throw ConfigError(where + ".weights: expected \"helmholtz-default\" or {m, p, Afrak}");
    }
  }
  return spec;
}

} // namespace

ProblemSpec load_problem(const std::filesystem::path &path)
{
  std::ifstream in(path);
  if (!in)
  {
    throw ConfigError("cannot open config file '" + path.string() + "'");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_problem(buffer.str());
}

} // namespace infsup
