#pragma once

// Reference computations written independently of the library code, used as
// test oracles.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <Eigen/Dense>

namespace oracle {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Backward Riccati recursion for sum_t (x'Qx + u'Ru) + x_N' S x_N, written in
/// Joseph form: S <- Q + K'RK + (A - BK)' S (A - BK). Returns S_0.
inline Mat finite_horizon_riccati(const Mat& A, const Mat& B, const Mat& Q, const Mat& R,
                                  const Mat& S_terminal, int steps) {
  Mat S = S_terminal;
  for (int t = 0; t < steps; ++t) {
    const Mat K = (R + B.transpose() * S * B).ldlt().solve(B.transpose() * S * A);
    const Mat Acl = A - B * K;
    S = Q + K.transpose() * R * K + Acl.transpose() * S * Acl;
    S = 0.5 * (S + S.transpose()).eval();
  }
  return S;
}

/// Stationary Riccati solution by running the recursion above to a fixed point.
inline Mat stationary_riccati(const Mat& A, const Mat& B, const Mat& Q, const Mat& R) {
  Mat S = Q;
  for (int k = 0; k < 200000; ++k) {
    const Mat next = finite_horizon_riccati(A, B, Q, R, S, 1);
    const double change = (next - S).norm();
    S = next;
    if (change <= 1e-14 * std::max(1.0, S.norm())) break;
  }
  return S;
}

/// Euler-discretized double integrator per axis: x = [p, v], u = a.
inline std::pair<Mat, Mat> double_integrator(double dt) {
  Mat A(2, 2);
  A << 1.0, dt, 0.0, 1.0;
  Mat B(2, 1);
  B << 0.0, dt;
  return {A, B};
}

/// Central-difference gradient of a scalar function.
template <typename F>
Vec fd_gradient(const F& f, const Vec& x, double h) {
  Vec g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vec a = x, b = x;
    a(i) += h;
    b(i) -= h;
    g(i) = (f(a) - f(b)) / (2.0 * h);
  }
  return g;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline int count_lines(const std::string& text) {
  int n = 0;
  for (char c : text) n += (c == '\n');
  return n;
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("ihoc_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace oracle
