#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "tpz/error.hpp"

namespace tpz {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Index = Eigen::Index;

/// n blocks of size d x d stacked vertically, i.e. a (d*n) x d matrix.
/// Block indices are 1-based: block(1) .. block(n).
class BlockVector {
 public:
  BlockVector() = default;
  BlockVector(Index n, Index d) : n_(n), d_(d), data_(Mat::Zero(n * d, d)) {}
  BlockVector(Mat data, Index d);

  static BlockVector from_blocks(const std::vector<Mat>& blocks);

  Index n() const { return n_; }
  Index d() const { return d_; }

  auto block(Index s) { return data_.middleRows(d_ * (s - 1), d_); }
  auto block(Index s) const { return data_.middleRows(d_ * (s - 1), d_); }

  Mat& matrix() { return data_; }
  const Mat& matrix() const { return data_; }

  std::vector<Mat> blocks() const;

 private:
  Index n_ = 0;
  Index d_ = 0;
  Mat data_;
};

/// Dense (d*n) x (d*n) matrix addressed by 1-based block pairs (s, t).
class BlockMatrix {
 public:
  BlockMatrix() = default;
  BlockMatrix(Index n, Index d) : n_(n), d_(d), data_(Mat::Zero(n * d, n * d)) {}
  BlockMatrix(Mat data, Index d, bool hermitian = false);

  Index n() const { return n_; }
  Index d() const { return d_; }
  bool hermitian() const { return hermitian_; }
  void set_hermitian(bool h) { hermitian_ = h; }

  auto block(Index s, Index t) { return data_.block(d_ * (s - 1), d_ * (t - 1), d_, d_); }
  auto block(Index s, Index t) const {
    return data_.block(d_ * (s - 1), d_ * (t - 1), d_, d_);
  }

  Mat& matrix() { return data_; }
  const Mat& matrix() const { return data_; }

  /// Largest ||A^{s,t} - (A^{t,s})^*||_F over all block pairs.
  double hermitian_defect() const;

 private:
  Index n_ = 0;
  Index d_ = 0;
  bool hermitian_ = false;
  Mat data_;
};

}  // namespace tpz
