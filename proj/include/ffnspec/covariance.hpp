#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>

#include "ffnspec/error.hpp"

namespace ffnspec {

/**
 * Streaming estimator of the unbiased token covariance
 * (X - mu)^T (X - mu) / (N - 1).
 *
 * Each batch is centered on its own mean, its co-moment is formed with a
 * symmetric rank update, and the result is folded into the running state with
 * the pairwise merge identity
 *
 *   C = C_a + C_b + (n_a n_b / n) * delta delta^T,  delta = mean_b - mean_a.
 *
 * This is the vector Welford recurrence generalized to blocks, so the state
 * never holds X and costs D^2 doubles regardless of N. Inputs of any scalar
 * type are accumulated in double precision. Only the lower triangle of the
 * co-moment is maintained; accessors return the full symmetric matrix.
 *
 * Not thread-safe: use one accumulator per worker and merge().
 */
class CovarianceAccumulator {
 public:
  using Matrix = Eigen::MatrixXd;
  using Vector = Eigen::VectorXd;

  explicit CovarianceAccumulator(Eigen::Index width) : width_(width) {
    if (width < 2) {
      throw Error(ErrorCode::WidthTooSmall, "covariance width must be at least 2");
    }
    mean_ = Vector::Zero(width);
    comoment_ = Matrix::Zero(width, width);
  }

  Eigen::Index width() const noexcept { return width_; }
  std::int64_t count() const noexcept { return count_; }
  const Vector& mean() const noexcept { return mean_; }

  /// Full symmetric running co-moment sum (x - mu)(x - mu)^T.
  Matrix comoment() const {
    Matrix full = comoment_.selfadjointView<Eigen::Lower>();
    return full;
  }

  /// Adds a batch of tokens (rows) x features (columns).
  template <typename Derived>
  CovarianceAccumulator& accumulate(const Eigen::MatrixBase<Derived>& batch) {
    if (batch.cols() != width_) {
      throw Error(ErrorCode::ShapeMismatch, "batch has " + std::to_string(batch.cols()) +
                                                " columns, accumulator width is " +
                                                std::to_string(width_));
    }
    if (batch.rows() < 1) {
      throw Error(ErrorCode::ShapeMismatch, "batch has no rows");
    }
    const Matrix rows = batch.template cast<double>();
    if (!rows.allFinite()) {
      throw Error(ErrorCode::NonFiniteInput, "batch contains non-finite values");
    }
    const Vector batch_mean = rows.colwise().mean().transpose();
    const Matrix centered = rows.rowwise() - batch_mean.transpose();
    Matrix batch_comoment = Matrix::Zero(width_, width_);
    batch_comoment.selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose());
    fold(static_cast<std::int64_t>(rows.rows()), batch_mean, batch_comoment);
    return *this;
  }

  /// Combines another accumulator's tokens into this one.
  CovarianceAccumulator& merge(const CovarianceAccumulator& other) {
    if (other.width_ != width_) {
      throw Error(ErrorCode::ShapeMismatch, "cannot merge accumulators of different width");
    }
    if (other.count_ > 0) fold(other.count_, other.mean_, other.comoment_);
    return *this;
  }

  /// comoment / (N - 1).
  Matrix finalize() const {
    if (count_ < 2) {
      throw Error(ErrorCode::InsufficientTokens,
                  "need at least 2 tokens, have " + std::to_string(count_));
    }
    return comoment() / static_cast<double>(count_ - 1);
  }

 private:
  // Co-moments keep their strict upper triangle at zero.
  void fold(std::int64_t n_b, const Vector& mean_b, const Matrix& batch_comoment) {
    if (count_ == 0) {
      count_ = n_b;
      mean_ = mean_b;
      comoment_ = batch_comoment;
      return;
    }
    const double n_a = static_cast<double>(count_);
    const double nb = static_cast<double>(n_b);
    const double n = n_a + nb;
    const Vector delta = mean_b - mean_;
    comoment_ += batch_comoment;
    comoment_.selfadjointView<Eigen::Lower>().rankUpdate(delta, n_a * nb / n);
    mean_ += delta * (nb / n);
    count_ += n_b;
  }

  Eigen::Index width_;
  std::int64_t count_ = 0;
  Vector mean_;
  Matrix comoment_;
};

/// Pairwise merge; the order of operands does not matter beyond rounding.
inline CovarianceAccumulator merge(CovarianceAccumulator a, const CovarianceAccumulator& b) {
  a.merge(b);
  return a;
}

}  // namespace ffnspec
