#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <vector>

#include "ffnspec/dump.hpp"
#include "ffnspec/spectrum.hpp"

namespace ffnspec {

/// Power-law exponent whose normalized spectrum at `width` has the given
/// soft rank. Bisection; target must lie in (1, width).
double alpha_for_soft_rank(std::int64_t width, double target_soft_rank);

/**
 * Seeded token sampler with a known population covariance
 * H diag(eigenvalues) H, where H is a random Householder reflection, plus a
 * random mean offset.
 */
class GaussianTokenSampler {
 public:
  GaussianTokenSampler(Eigen::VectorXd eigenvalues, std::uint64_t seed);

  Eigen::Index width() const noexcept { return stddev_.size(); }
  RowMatrix sample(Eigen::Index n_tokens);
  Eigen::MatrixXd population_covariance() const;

 private:
  Eigen::VectorXd stddev_;
  Eigen::VectorXd reflector_;  // unit vector
  Eigen::VectorXd offset_;
  std::mt19937_64 rng_;
};

struct SweepFixture {
  std::vector<std::int64_t> widths = {256, 512, 683, 1024};
  std::int64_t layers = 2;
  std::vector<std::int64_t> steps = {1000};
  double soft_beta = 0.9;
  double base_alpha = 1.0;  // spectrum exponent at the smallest width
  double tokens_per_width = 16.0;
  double layer_spread = 0.05;  // relative spread of per-layer soft-rank targets
  std::int64_t embed_dim = 256;  // d, for the width-multiplier header field
  DType dtype = DType::F32;
  std::uint64_t seed = 7;
};

/// Population soft-rank target for (width, layer) in a fixture.
double fixture_soft_rank_target(const SweepFixture& fixture, std::int64_t width,
                                std::int64_t layer);

/// Writes one run directory per width (root/w<width>) and returns them.
std::vector<std::filesystem::path> write_sweep_fixture(const std::filesystem::path& root,
                                                       const SweepFixture& fixture);

}  // namespace ffnspec
