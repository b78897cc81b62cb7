#pragma once

// Reference computations for tests. Each follows the textbook definition and
// shares no code path with the library.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

/// Cyclic Jacobi rotations on a symmetric matrix; eigenvalues descending.
inline std::vector<double> jacobi_eigenvalues(Eigen::MatrixXd a, int max_sweeps = 100) {
  const Eigen::Index n = a.rows();
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off < 1e-30 * std::max(1.0, a.squaredNorm())) break;
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> ev(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) ev[i] = a(i, i);
  std::sort(ev.begin(), ev.end(), std::greater<double>());
  return ev;
}

/// (X - mu)^T (X - mu) / (N - 1) with an explicit mean pass.
inline Eigen::MatrixXd two_pass_covariance(const Eigen::MatrixXd& x) {
  const Eigen::Index n = x.rows(), d = x.cols();
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(d);
  for (Eigen::Index r = 0; r < n; ++r) mu += x.row(r).transpose();
  mu /= static_cast<double>(n);
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index r = 0; r < n; ++r) {
    const Eigen::VectorXd z = x.row(r).transpose() - mu;
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j) c(i, j) += z[i] * z[j];
  }
  return c / static_cast<double>(n - 1);
}

inline std::vector<long double> normalized(std::vector<double> lambda) {
  std::sort(lambda.begin(), lambda.end(), std::greater<double>());
  long double total = 0;
  for (double l : lambda) total += l;
  std::vector<long double> p;
  for (double l : lambda) p.push_back(l / total);
  return p;
}

inline double participation_ratio(const std::vector<double>& lambda) {
  long double s1 = 0, s2 = 0;
  for (double l : lambda) {
    s1 += l;
    s2 += static_cast<long double>(l) * l;
  }
  return static_cast<double>(s1 * s1 / s2);
}

inline double shannon_rank(const std::vector<double>& lambda) {
  long double h = 0;
  for (long double p : normalized(lambda))
    if (p > 0) h -= p * std::log(p);
  return static_cast<double>(std::exp(h));
}

/// Literal cumulative-curve definition: (2/D) sum_k (C_k - k/D).
inline double concentration(const std::vector<double>& lambda) {
  const auto p = normalized(lambda);
  const auto d = static_cast<long double>(p.size());
  long double cum = 0, acc = 0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    cum += p[k];
    acc += cum - static_cast<long double>(k + 1) / d;
  }
  return static_cast<double>(2.0L / d * acc);
}

inline double harmonic(int n, double alpha = 1.0) {
  long double h = 0;
  for (int k = n; k >= 1; --k) h += std::pow(static_cast<long double>(k), -alpha);
  return static_cast<double>(h);
}

}  // namespace oracle
