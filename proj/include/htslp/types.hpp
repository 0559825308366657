// Common scalar and dense/sparse type aliases used across the library.
#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace htslp {

using Complex = std::complex<double>;
using Vec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;
using SpMat = Eigen::SparseMatrix<double>;
using SpCMat = Eigen::SparseMatrix<Complex>;

inline constexpr double kPi = 3.14159265358979323846;

// Thrown when a caller hands an operation parameters outside its contract.
class InvalidParameterError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Thrown for structural problems in a network description.
class TopologyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace htslp
