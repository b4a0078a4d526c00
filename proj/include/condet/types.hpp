#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace condet {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using ArrayX = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

using Real = double;
using Vector = VectorX<Real>;
using Matrix = MatrixX<Real>;
using BoolVector = Eigen::Array<bool, Eigen::Dynamic, 1>;
using IntVector = Eigen::Array<int, Eigen::Dynamic, 1>;

/// Malformed input: files, flags, sizes, domain violations. CLI exit code 1.
struct InputError : std::runtime_error {
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

/// Logically impossible request: unsatisfiable requirements, infeasible hard
/// clauses. CLI exit code 2.
struct InfeasibleError : std::runtime_error {
  explicit InfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace condet
