#pragma once

#include "dualarm/core/error.hpp"
#include "dualarm/core/types.hpp"

#include <Eigen/Cholesky>
#include <vector>

namespace dualarm {

/// Symmetric positive-definite block-tridiagonal system:
///   diag[i] x_i + lower[i] x_{i-1} + lower[i+1]^T x_{i+1} = rhs[i]
/// with lower[0] unused. Solved by block Thomas elimination.
template <typename Scalar = double>
struct BlockTridiagonal {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  std::vector<Mat> diag;
  std::vector<Mat> lower;
  std::vector<Vec> rhs;

  explicit BlockTridiagonal(int blocks = 0, int size = 0)
      : diag(blocks, Mat::Zero(size, size)), lower(blocks, Mat::Zero(size, size)), rhs(blocks, Vec::Zero(size)) {}

  int blocks() const { return static_cast<int>(diag.size()); }

  Mat dense() const {
    const int n = blocks(), b = n ? static_cast<int>(diag[0].rows()) : 0;
    Mat A = Mat::Zero(n * b, n * b);
    for (int i = 0; i < n; ++i) {
      A.block(i * b, i * b, b, b) = diag[i];
      if (i > 0) {
        A.block(i * b, (i - 1) * b, b, b) = lower[i];
        A.block((i - 1) * b, i * b, b, b) = lower[i].transpose();
      }
    }
    return A;
  }

  Vec dense_rhs() const {
    const int n = blocks(), b = n ? static_cast<int>(rhs[0].size()) : 0;
    Vec r(n * b);
    for (int i = 0; i < n; ++i) r.segment(i * b, b) = rhs[i];
    return r;
  }

  /// Returns the solution blocks; throws if a pivot block is not positive definite.
  std::vector<Vec> solve() const {
    const int n = blocks();
    std::vector<Mat> C(n);  // C_i = M_i^{-1} U_i with U_i = lower[i+1]^T
    std::vector<Vec> d(n);
    for (int i = 0; i < n; ++i) {
      Mat M = diag[i];
      Vec r = rhs[i];
      if (i > 0) {
        M.noalias() -= lower[i] * C[i - 1];
        r.noalias() -= lower[i] * d[i - 1];
      }
      Eigen::LLT<Mat> llt(M);
      if (llt.info() != Eigen::Success) throw InvariantError("block tridiagonal: pivot block not positive definite");
      d[i] = llt.solve(r);
      if (i + 1 < n) C[i] = llt.solve(Mat(lower[i + 1].transpose()));
    }
    std::vector<Vec> x(n);
    for (int i = n - 1; i >= 0; --i) {
      x[i] = d[i];
      if (i + 1 < n) x[i].noalias() -= C[i] * x[i + 1];
    }
    return x;
  }
};

}  // namespace dualarm
