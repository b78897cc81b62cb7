#include "ffnspec/synthetic.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "ffnspec/metrics.hpp"

namespace ffnspec {

Spectrum power_law_spectrum(const PowerLawSpec& spec) {
  if (spec.width < 2) {
    throw Error(ErrorCode::WidthTooSmall, "power-law width must be at least 2");
  }
  if (!(spec.alpha >= 0.0) || !std::isfinite(spec.alpha)) {
    throw Error(ErrorCode::BadParameter, "power-law alpha must be finite and nonnegative");
  }
  Eigen::VectorXd values(spec.width);
  for (std::int64_t k = 0; k < spec.width; ++k) {
    values[k] = std::pow(static_cast<double>(k + 1), -spec.alpha);
  }
  values /= values.sum();
  return Spectrum(std::move(values));
}

std::int64_t component_count(double fraction, std::int64_t width) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw Error(ErrorCode::BadFraction, fmt::format("fraction {} outside (0, 1]", fraction));
  }
  // 0.7 * 10 evaluates to 7.000000000000001; exact products must not round up.
  const double scaled = fraction * static_cast<double>(width);
  const auto k = static_cast<std::int64_t>(std::ceil(scaled - 1e-9 * std::max(1.0, scaled)));
  return std::clamp<std::int64_t>(k, 1, width);
}

double cumulative_variance_at(const Spectrum& spectrum, double fraction) {
  const std::int64_t k = component_count(fraction, spectrum.width());
  return spectrum.eigenvalues().head(k).sum() / spectrum.total();
}

ConcentrationRow concentration_row(const PowerLawSpec& spec) {
  const Spectrum s = power_law_spectrum(spec);
  ConcentrationRow row;
  row.alpha = spec.alpha;
  row.width = spec.width;
  row.top1_share = s[0] / s.total();
  row.var_at_10pct = cumulative_variance_at(s, 0.10);
  row.var_at_25pct = cumulative_variance_at(s, 0.25);
  row.var_at_50pct = cumulative_variance_at(s, 0.50);
  row.concentration = spectral_concentration(s);
  return row;
}

std::vector<ConcentrationRow> table3_report(std::span<const double> alphas,
                                            std::span<const std::int64_t> widths) {
  if (alphas.empty() || widths.empty()) {
    throw Error(ErrorCode::BadParameter, "alpha and width lists must be non-empty");
  }
  std::vector<ConcentrationRow> rows;
  rows.reserve(alphas.size() * widths.size());
  for (double alpha : alphas) {
    for (std::int64_t width : widths) {
      rows.push_back(concentration_row({alpha, width}));
    }
  }
  return rows;
}

std::string table3_csv(const std::vector<ConcentrationRow>& rows, bool display) {
  // Preserve first-seen order of alphas and widths.
  std::vector<double> alphas;
  std::vector<std::int64_t> widths;
  std::map<std::pair<double, std::int64_t>, const ConcentrationRow*> cell;
  for (const auto& r : rows) {
    if (std::find(alphas.begin(), alphas.end(), r.alpha) == alphas.end()) alphas.push_back(r.alpha);
    if (std::find(widths.begin(), widths.end(), r.width) == widths.end()) widths.push_back(r.width);
    cell[{r.alpha, r.width}] = &r;
  }

  struct Column {
    const char* name;
    double ConcentrationRow::*field;
    bool percent;
  };
  const Column columns[] = {
      {"top1", &ConcentrationRow::top1_share, true},
      {"var10", &ConcentrationRow::var_at_10pct, true},
      {"var25", &ConcentrationRow::var_at_25pct, true},
      {"var50", &ConcentrationRow::var_at_50pct, true},
      {"sc", &ConcentrationRow::concentration, false},
  };

  std::string out = "alpha";
  for (const auto& c : columns) {
    for (auto w : widths) out += fmt::format(",{}_{}", c.name, w);
  }
  out += '\n';
  for (double a : alphas) {
    out += (display && a == std::floor(a)) ? fmt::format("{:.1f}", a) : fmt::format("{}", a);
    for (const auto& c : columns) {
      for (auto w : widths) {
        auto it = cell.find({a, w});
        if (it == cell.end()) {
          out += ",";
          continue;
        }
        const double v = it->second->*c.field;
        if (!display) {
          out += fmt::format(",{:.17g}", v);
        } else if (c.percent) {
          out += fmt::format(",{:.1f}%", 100.0 * v);
        } else {
          out += fmt::format(",{:.2f}", v);
        }
      }
    }
    out += '\n';
  }
  return out;
}

}  // namespace ffnspec
