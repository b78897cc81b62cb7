#include "ffnspec/fixtures.hpp"

#include <fmt/format.h>

#include <cmath>

#include "ffnspec/metrics.hpp"
#include "ffnspec/synthetic.hpp"

namespace ffnspec {

double alpha_for_soft_rank(std::int64_t width, double target) {
  if (!(target > 1.0 && target < static_cast<double>(width))) {
    throw Error(ErrorCode::BadParameter,
                fmt::format("soft-rank target {} outside (1, {})", target, width));
  }
  // soft rank is strictly decreasing in alpha
  double lo = 0.0, hi = 1.0;
  while (soft_rank(power_law_spectrum({hi, width})) > target) hi *= 2.0;
  for (int i = 0; i < 80; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (soft_rank(power_law_spectrum({mid, width})) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

GaussianTokenSampler::GaussianTokenSampler(Eigen::VectorXd eigenvalues, std::uint64_t seed)
    : rng_(seed) {
  if (eigenvalues.size() < 2 || (eigenvalues.array() < 0.0).any()) {
    throw Error(ErrorCode::BadParameter, "sampler needs >= 2 nonnegative eigenvalues");
  }
  stddev_ = eigenvalues.cwiseSqrt();
  std::normal_distribution<double> normal;
  reflector_.resize(stddev_.size());
  offset_.resize(stddev_.size());
  for (Eigen::Index i = 0; i < reflector_.size(); ++i) reflector_[i] = normal(rng_);
  for (Eigen::Index i = 0; i < offset_.size(); ++i) offset_[i] = 0.5 * normal(rng_);
  reflector_.normalize();
}

RowMatrix GaussianTokenSampler::sample(Eigen::Index n_tokens) {
  std::normal_distribution<double> normal;
  RowMatrix x(n_tokens, width());
  for (Eigen::Index r = 0; r < n_tokens; ++r) {
    for (Eigen::Index c = 0; c < width(); ++c) x(r, c) = normal(rng_) * stddev_[c];
  }
  // x <- x H with H = I - 2 v v^T
  const Eigen::VectorXd proj = x * reflector_;
  x.noalias() -= 2.0 * proj * reflector_.transpose();
  x.rowwise() += offset_.transpose();
  return x;
}

Eigen::MatrixXd GaussianTokenSampler::population_covariance() const {
  const Eigen::Index d = width();
  const Eigen::MatrixXd h =
      Eigen::MatrixXd::Identity(d, d) - 2.0 * reflector_ * reflector_.transpose();
  return h * stddev_.cwiseAbs2().asDiagonal() * h;
}

double fixture_soft_rank_target(const SweepFixture& f, std::int64_t width, std::int64_t layer) {
  const std::int64_t base_width = f.widths.front();
  const double base = soft_rank(power_law_spectrum({f.base_alpha, base_width}));
  const double centered =
      f.layers > 1 ? (static_cast<double>(layer) / static_cast<double>(f.layers - 1) - 0.5) : 0.0;
  const double layer_factor = 1.0 + 2.0 * f.layer_spread * centered;
  return base * layer_factor *
         std::pow(static_cast<double>(width) / static_cast<double>(base_width), f.soft_beta);
}

std::vector<std::filesystem::path> write_sweep_fixture(const std::filesystem::path& root,
                                                       const SweepFixture& f) {
  namespace fs = std::filesystem;
  if (f.widths.empty() || f.layers < 1 || f.steps.empty()) {
    throw Error(ErrorCode::BadParameter, "fixture needs widths, layers and steps");
  }
  std::vector<fs::path> runs;
  std::uint64_t stream = 0;
  for (auto width : f.widths) {
    const fs::path dir = root / fmt::format("w{}", width);
    fs::create_directories(dir);
    runs.push_back(dir);
    const auto n_tokens = static_cast<Eigen::Index>(std::llround(f.tokens_per_width * width));
    for (std::int64_t layer = 0; layer < f.layers; ++layer) {
      const double alpha = alpha_for_soft_rank(width, fixture_soft_rank_target(f, width, layer));
      // unit mean eigenvalue
      Eigen::VectorXd eig = power_law_spectrum({alpha, width}).eigenvalues() *
                            static_cast<double>(width);
      for (auto step : f.steps) {
        GaussianTokenSampler sampler(eig, f.seed * 1000003ULL + stream++);
        DumpHeader h;
        h.dtype = f.dtype;
        h.layer = static_cast<std::uint32_t>(layer);
        h.step = static_cast<std::uint64_t>(step);
        h.width_multiplier_milli = static_cast<std::uint32_t>(
            std::llround(1000.0 * static_cast<double>(width) / static_cast<double>(f.embed_dim)));
        write_dump(dir / fmt::format("L{:02}_S{:07}.spdc", layer, step), h,
                   sampler.sample(n_tokens));
      }
    }
  }
  return runs;
}

}  // namespace ffnspec
