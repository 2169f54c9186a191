#pragma once

#include <cmath>
#include <filesystem>
#include <functional>
#include <random>
#include <string>

#include "kaslib/numerics.hpp"
#include "kaslib/random.hpp"

namespace testutil {

using kas::Index;
using kas::Matrix;
using kas::Vector;

inline Matrix gaussian_matrix(Index rows, Index cols, std::uint64_t seed) {
  kas::Rng rng = kas::make_rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix a(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) a(i, j) = n(rng);
  return a;
}

inline Matrix uniform_matrix(Index rows, Index cols, double lo, double hi, std::uint64_t seed) {
  kas::Rng rng = kas::make_rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix a(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) a(i, j) = u(rng);
  return a;
}

inline Matrix random_orthogonal(Index n, std::uint64_t seed) {
  Eigen::HouseholderQR<Matrix> qr(gaussian_matrix(n, n, seed));
  return qr.householderQ() * Matrix::Identity(n, n);
}

// Central differences of a vector-valued function; columns are d/dx_i.
inline Matrix fd_jacobian(const std::function<Vector(const Vector&)>& f, const Vector& x, double h = 1e-6) {
  const Vector f0 = f(x);
  Matrix jac(f0.size(), x.size());
  for (Index i = 0; i < x.size(); ++i) {
    Vector xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    jac.col(i) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return jac;
}

inline double rel_err(const Matrix& a, const Matrix& b) {
  const double scale = std::max(b.norm(), 1e-300);
  return (a - b).norm() / scale;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("kaslib_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace testutil
