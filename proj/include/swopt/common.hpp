#pragma once
/**
 * @file common.hpp
 * @brief basic value types and the exception hierarchy shared by all modules
 */

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace swopt {

using Point = Eigen::Vector2d;
using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;

/// conserved shallow-water state (H, Q1, Q2) or adjoint state (p, r1, r2)
using State = Eigen::Vector3d;

/// 3 components x 2 space dimensions
using FluxMatrix = Eigen::Matrix<double, 3, 2>;

/// root of all errors thrown by the library
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// malformed input file (mesh, csv)
class ParseError : public Error {
public:
  using Error::Error;
};

/// a mesh violating its structural invariants
class MeshError : public Error {
public:
  using Error::Error;
};

/// nonphysical state or arguments handed to a kernel
class DomainError : public Error {
public:
  using Error::Error;
};

/// failure of a time march or linear/nonlinear solve
class SolverError : public Error {
public:
  using Error::Error;
};

/// invalid scenario configuration; the message names the key path
class ConfigError : public Error {
public:
  using Error::Error;
};

} // namespace swopt
