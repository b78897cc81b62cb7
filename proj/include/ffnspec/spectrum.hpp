#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "ffnspec/error.hpp"

namespace ffnspec {

/**
 * Eigenvalues of a covariance matrix, sorted in descending order.
 *
 * Construction sorts the input, so any permutation of the same values yields
 * the same spectrum. Values must be finite and nonnegative with a positive sum;
 * the width D is the number of eigenvalues (latent dimensions).
 */
template <typename Scalar>
class EigenSpectrum {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  explicit EigenSpectrum(Vector eigenvalues) : values_(std::move(eigenvalues)) {
    if (values_.size() == 0) {
      throw Error(ErrorCode::DegenerateSpectrum, "spectrum has no eigenvalues");
    }
    for (Eigen::Index i = 0; i < values_.size(); ++i) {
      if (!std::isfinite(values_[i])) {
        throw Error(ErrorCode::NonFiniteInput, "eigenvalue " + std::to_string(i) + " is not finite");
      }
      if (values_[i] < Scalar(0)) {
        throw Error(ErrorCode::NegativeEigenvalue, "eigenvalue " + std::to_string(i) + " is negative");
      }
    }
    std::sort(values_.data(), values_.data() + values_.size(), std::greater<Scalar>());
    total_ = values_.sum();
    if (!(total_ > Scalar(0))) {
      throw Error(ErrorCode::DegenerateSpectrum, "all eigenvalues are zero");
    }
  }

  const Vector& eigenvalues() const noexcept { return values_; }
  Eigen::Index width() const noexcept { return values_.size(); }
  Scalar total() const noexcept { return total_; }
  Scalar operator[](Eigen::Index i) const { return values_[i]; }

 private:
  Vector values_;
  Scalar total_{};
};

using Spectrum = EigenSpectrum<double>;

/// p_i = lambda_i / sum_j lambda_j; same order as the source spectrum.
template <typename Scalar>
class SpectralProbabilities {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  explicit SpectralProbabilities(const EigenSpectrum<Scalar>& spectrum)
      : p_(spectrum.eigenvalues() / spectrum.total()) {}

  const Vector& values() const noexcept { return p_; }
  Eigen::Index size() const noexcept { return p_.size(); }
  Scalar operator[](Eigen::Index i) const { return p_[i]; }

 private:
  Vector p_;
};

template <typename Scalar>
SpectralProbabilities<Scalar> probabilities(const EigenSpectrum<Scalar>& spectrum) {
  return SpectralProbabilities<Scalar>(spectrum);
}

inline constexpr double kDefaultClampTolerance = 1e-10;

/**
 * Eigenvalues of a symmetric positive semi-definite matrix.
 *
 * Asymmetry is measured entrywise against tolerance * max|entry|. Eigenvalues
 * in [-tolerance * lambda_max, 0) are floating-point noise and clamp to zero;
 * anything more negative is rejected as NotPSD.
 */
template <typename Derived>
EigenSpectrum<typename Derived::Scalar> spectrum_from_covariance(
    const Eigen::MatrixBase<Derived>& cov,
    typename Derived::Scalar tolerance = typename Derived::Scalar(kDefaultClampTolerance)) {
  using Scalar = typename Derived::Scalar;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  if (cov.rows() != cov.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "covariance must be square");
  }
  if (cov.rows() < 2) {
    throw Error(ErrorCode::WidthTooSmall, "covariance width must be at least 2");
  }
  if (tolerance < Scalar(0) || !std::isfinite(tolerance)) {
    throw Error(ErrorCode::BadParameter, "tolerance must be a finite nonnegative value");
  }
  if (!cov.allFinite()) {
    throw Error(ErrorCode::NonFiniteInput, "covariance has non-finite entries");
  }

  const Scalar scale = cov.cwiseAbs().maxCoeff();
  const Scalar asymmetry = (cov - cov.transpose()).cwiseAbs().maxCoeff();
  if (asymmetry > tolerance * scale) {
    throw Error(ErrorCode::NotSymmetric, "max asymmetry " + std::to_string(double(asymmetry)) +
                                             " exceeds tolerance");
  }

  Eigen::SelfAdjointEigenSolver<Matrix> solver(cov.derived(), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::NotSymmetric, "eigendecomposition did not converge");
  }
  typename EigenSpectrum<Scalar>::Vector values = solver.eigenvalues();

  const Scalar lambda_max = values.maxCoeff();
  if (!(lambda_max > Scalar(0))) {
    if (values.minCoeff() < Scalar(0)) {
      throw Error(ErrorCode::NotPSD, "matrix is negative definite");
    }
    throw Error(ErrorCode::DegenerateSpectrum, "all eigenvalues are zero");
  }
  const Scalar floor = -tolerance * lambda_max;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (values[i] < floor) {
      throw Error(ErrorCode::NotPSD, "eigenvalue " + std::to_string(double(values[i])) +
                                         " below clamping floor");
    }
    if (values[i] < Scalar(0)) values[i] = Scalar(0);
  }
  return EigenSpectrum<Scalar>(std::move(values));
}

}  // namespace ffnspec
