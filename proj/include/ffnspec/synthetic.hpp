#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ffnspec/spectrum.hpp"

namespace ffnspec {

/// Truncated power law lambda_k ∝ k^-alpha for k = 1..width.
struct PowerLawSpec {
  double alpha = 1.0;
  std::int64_t width = 2;
};

/// Eigenvalues k^-alpha normalized to unit sum.
Spectrum power_law_spectrum(const PowerLawSpec& spec);

/// Number of leading components covering `fraction` of the width:
/// ceil(fraction * D), clamped to [1, D].
std::int64_t component_count(double fraction, std::int64_t width);

/// Share of total variance carried by the leading component_count(fraction, D)
/// eigenvalues.
double cumulative_variance_at(const Spectrum& spectrum, double fraction);

struct ConcentrationRow {
  double alpha = 0.0;
  std::int64_t width = 0;
  double top1_share = 0.0;
  double var_at_10pct = 0.0;
  double var_at_25pct = 0.0;
  double var_at_50pct = 0.0;
  double concentration = 0.0;
};

ConcentrationRow concentration_row(const PowerLawSpec& spec);

/// One row per (alpha, width), alpha-major, in input order.
std::vector<ConcentrationRow> table3_report(std::span<const double> alphas,
                                            std::span<const std::int64_t> widths);

inline const std::vector<double> kDefaultAlphas = {0.8, 1.0, 1.2, 1.5, 2.0};
inline const std::vector<std::int64_t> kDefaultWidths = {768, 2048, 3072};

/**
 * Wide CSV laid out like the reference concentration table: one line per
 * alpha, then top-1 share, variance at 10/25/50% and concentration, each
 * across all widths. Shares are fractions in [0, 1].
 *
 * With `display` set, shares print as percentages with one decimal and
 * concentration with two decimals; otherwise values carry 17 significant
 * digits.
 */
std::string table3_csv(const std::vector<ConcentrationRow>& rows, bool display = false);

}  // namespace ffnspec
