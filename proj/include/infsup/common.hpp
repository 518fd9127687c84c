// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <complex>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>

namespace infsup
{

using Complex = std::complex<double>;
inline constexpr Complex I_unit{0.0, 1.0};

using Point = Eigen::Vector2d;
using VectorXc = Eigen::VectorXcd;
using MatrixXc = Eigen::MatrixXcd;
using SparseMatrixd = Eigen::SparseMatrix<double>;
using SparseMatrixc = Eigen::SparseMatrix<Complex>;

/// Base class of every error raised by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error
{
public:
  using Error::Error;
};

class ValidationError : public Error
{
public:
  using Error::Error;
};

class ConfigError : public Error
{
public:
  using Error::Error;
};

/// A linear system that should be uniquely solvable was found singular.
class SingularSystemError : public Error
{
public:
  using Error::Error;
};

class ConvergenceError : public Error
{
public:
  using Error::Error;
};

/// Run body(i) for i in [0, n) on up to `threads` workers. Each index is
/// visited exactly once; callers write to disjoint slots only.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)> &body);

} // namespace infsup
