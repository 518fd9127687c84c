// SPDX-License-Identifier: Apache-2.0
// Command-line front end: certify, oracle, meshgen.
#include "infsup/certify.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace
{

using namespace infsup;

struct RunConfig
{
  std::string mesh;
  std::string config;
  std::string out;
  bool diagnostics = false;
  int refinements = 2;
  int threads = 1;
  double safety = 1.0 + 1e-6;
  double tol = 1e-10;
};

// "square:n" or "square:n:neumann-bottom", otherwise a mesh file path.
Mesh mesh_from_source(const std::string &source)
{
  const std::string prefix = "square:";
  if (source.rfind(prefix, 0) != 0)
  {
    return load_mesh(source);
  }
  std::string rest = source.substr(prefix.size());
  bool neumann_bottom = false;
  if (const auto colon = rest.find(':'); colon != std::string::npos)
  {
    if (rest.substr(colon + 1) != "neumann-bottom")
    {
      throw ConfigError("unknown mesh generator option in '" + source + "'");
    }
    neumann_bottom = true;
    rest = rest.substr(0, colon);
  }
  std::size_t used = 0;
  int n = 0;
  try
  {
    n = std::stoi(rest, &used);
  }
  catch (const std::exception &)
  {
    used = 0;
  }
  if (used == 0 || used != rest.size())
  {
    throw ConfigError("bad mesh generator '" + source + "'");
  }
  return generate_unit_square(n, !neumann_bottom);
}

void emit(const std::string &path, const std::string &text)
{
  if (path.empty() || path == "-")
  {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text))
  {
    throw Error("cannot write output file '" + path + "'");
  }
}

CertifyOptions options_of(const RunConfig &rc)
{
  if (!(rc.tol > 0.0))
  {
    throw ConfigError("--tol must be positive");
  }
  if (!(rc.safety >= 1.0))
  {
    throw ConfigError("--safety must be at least 1");
  }
  if (rc.refinements < 0 || rc.threads < 1)
  {
    throw ConfigError("--refinements must be >= 0 and --threads >= 1");
  }
  CertifyOptions opts;
  opts.solver_tol = rc.tol;
  opts.spectral.safety = rc.safety;
  opts.threads = rc.threads;
  opts.diagnostics = rc.diagnostics;
  opts.refinements = rc.refinements;
  return opts;
}

int cmd_certify(const RunConfig &rc, bool oracle)
{
  const CertifyOptions opts = options_of(rc);
  const ProblemSpec spec = load_problem(rc.config);
  const Mesh mesh = mesh_from_source(rc.mesh);
  CertificationRun run = run_certification(mesh, spec, opts);
  run.certificate.mesh_source = rc.mesh;
  run.certificate.config_source = rc.config;
  if (oracle || opts.diagnostics)
  {
    run.certificate.diagnostics = efficiency_diagnostics(run, opts);
  }
  const Certificate &cert = run.certificate;
  emit(rc.out, oracle ? to_json(*cert.diagnostics) : to_json(cert));
  for (const auto &w : cert.warnings)
  {
    std::cerr << "warning: " << w << "\n";
  }
  std::cerr << cert.verdict() << ": gamma_h = " << cert.gamma_h << "\n";
  return cert.certified ? 0 : 2;
}

void add_run_flags(CLI::App *cmd, RunConfig &rc)
{
  cmd->add_option("--mesh", rc.mesh, "mesh file or square:n[:neumann-bottom]")->required();
  cmd->add_option("--config", rc.config, "problem config (JSON)")->required();
  cmd->add_option("--out", rc.out, "output path (default: stdout)");
  cmd->add_flag("--diagnostics", rc.diagnostics, "attach refined-mesh diagnostics");
  cmd->add_option("--refinements", rc.refinements, "uniform refinements for reference quantities");
  cmd->add_option("--threads", rc.threads, "worker threads");
  cmd->add_option("--safety", rc.safety, "multiplicative safety factor on eigenvalue estimates");
  cmd->add_option("--tol", rc.tol, "relative solver tolerance");
}

} // namespace

int main(int argc, char **argv)
{
  CLI::App app{"Inf-sup stability certificates for 2D second-order problems"};
  app.require_subcommand(1);

  RunConfig certify_rc;
  CLI::App *certify = app.add_subcommand("certify", "compute a certified inf-sup lower bound");
  add_run_flags(certify, certify_rc);

  RunConfig oracle_rc;
  CLI::App *oracle = app.add_subcommand("oracle", "reference inf-sup and efficiency diagnostics");
  add_run_flags(oracle, oracle_rc);

  int n = 1;
  bool neumann_bottom = false;
  std::string mesh_out;
  CLI::App *meshgen = app.add_subcommand("meshgen", "write a unit-square mesh");
  meshgen->add_option("-n,--n", n, "cells per side")->required();
  meshgen->add_flag("--neumann-bottom", neumann_bottom, "Neumann condition on y = 0");
  meshgen->add_option("--out", mesh_out, "output path (default: stdout)");

  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError &e)
  {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try
  {
    if (certify->parsed())
    {
      return cmd_certify(certify_rc, false);
    }
    if (oracle->parsed())
    {
      return cmd_certify(oracle_rc, true);
    }
    std::ostringstream text;
    write_mesh(text, generate_unit_square(n, !neumann_bottom));
    emit(mesh_out, text.str());
    return 0;
  }
  catch (const std::exception &e)
  {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
