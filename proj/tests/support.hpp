#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace dsr::fixtures {

/// Uniform points on [0, 1] from a fixed seed.
inline Eigen::VectorXd uniform_points(Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::VectorXd x(n);
  for (Eigen::Index i = 0; i < n; ++i) x[i] = u(rng);
  return x;
}

inline Eigen::VectorXd normal_vector(Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = z(rng);
  return v;
}

/// Dense Gram matrix of min(x, t) - x t, built without the library.
inline Eigen::MatrixXd sobolev_gram(const Eigen::VectorXd& x) {
  Eigen::MatrixXd g(x.size(), x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i)
    for (Eigen::Index j = 0; j < x.size(); ++j) g(i, j) = std::min(x[i], x[j]) - x[i] * x[j];
  return g;
}

}  // namespace dsr::fixtures
