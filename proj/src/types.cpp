#include "tpz/types.hpp"

#include <algorithm>

namespace tpz {

BlockVector::BlockVector(Mat data, Index d) : d_(d), data_(std::move(data)) {
  if (d <= 0 || data_.cols() != d || data_.rows() % d != 0) {
    throw Error(ErrorCode::MalformedSpec, "block vector must be (d*n) x d");
  }
  n_ = data_.rows() / d;
}

BlockVector BlockVector::from_blocks(const std::vector<Mat>& blocks) {
  if (blocks.empty()) return {};
  const Index d = blocks.front().rows();
  BlockVector out(static_cast<Index>(blocks.size()), d);
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    if (blocks[k].rows() != d || blocks[k].cols() != d) {
      throw Error(ErrorCode::MalformedSpec, "inconsistent block sizes");
    }
    out.block(static_cast<Index>(k) + 1) = blocks[k];
  }
  return out;
}

std::vector<Mat> BlockVector::blocks() const {
  std::vector<Mat> out;
  out.reserve(static_cast<std::size_t>(n_));
  for (Index s = 1; s <= n_; ++s) out.emplace_back(block(s));
  return out;
}

BlockMatrix::BlockMatrix(Mat data, Index d, bool hermitian)
    : d_(d), hermitian_(hermitian), data_(std::move(data)) {
  if (d <= 0 || data_.rows() != data_.cols() || data_.rows() % d != 0) {
    throw Error(ErrorCode::MalformedSpec, "block matrix must be (d*n) x (d*n)");
  }
  n_ = data_.rows() / d;
}

double BlockMatrix::hermitian_defect() const {
  double worst = 0.0;
  for (Index s = 1; s <= n_; ++s) {
    for (Index t = s; t <= n_; ++t) {
      worst = std::max(worst, (Mat(block(s, t)) - Mat(block(t, s)).adjoint()).norm());
    }
  }
  return worst;
}

}  // namespace tpz
