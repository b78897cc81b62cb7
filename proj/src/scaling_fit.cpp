#include "ffnspec/scaling_fit.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

namespace ffnspec {

std::string_view to_string(MetricName name) {
  switch (name) {
    case MetricName::HardRank: return "hard_rank";
    case MetricName::SoftRank: return "soft_rank";
    case MetricName::HardUtil: return "hard_util";
    case MetricName::SoftUtil: return "soft_util";
    case MetricName::Concentration: return "concentration";
    case MetricName::Sui: return "sui";
    case MetricName::Edim: return "edim";
  }
  return "unknown";
}

std::optional<MetricName> parse_metric(std::string_view text) {
  for (MetricName m : kAllMetrics) {
    if (to_string(m) == text) return m;
  }
  return std::nullopt;
}

double metric_value(const Metrics& metrics, MetricName name) {
  switch (name) {
    case MetricName::HardRank: return metrics.hard_rank;
    case MetricName::SoftRank: return metrics.soft_rank;
    case MetricName::HardUtil: return metrics.hard_util;
    case MetricName::SoftUtil: return metrics.soft_util;
    case MetricName::Concentration: return metrics.concentration;
    case MetricName::Sui: return metrics.sui;
    case MetricName::Edim: return metrics.edim;
  }
  return 0.0;
}

std::string_view to_string(NormVariant norm) {
  switch (norm) {
    case NormVariant::Raw: return "raw";
    case NormVariant::PerWidthMinusOne: return "per_width_minus_one";
    case NormVariant::PerWidth: return "per_width";
  }
  return "unknown";
}

std::optional<NormVariant> parse_norm(std::string_view text) {
  for (NormVariant n : {NormVariant::Raw, NormVariant::PerWidthMinusOne, NormVariant::PerWidth}) {
    if (to_string(n) == text) return n;
  }
  return std::nullopt;
}

double normalize_value(double value, std::int64_t width, NormVariant norm) {
  switch (norm) {
    case NormVariant::Raw: return value;
    case NormVariant::PerWidthMinusOne:
      if (width < 2) throw Error(ErrorCode::WidthTooSmall, "per_width_minus_one needs width >= 2");
      return value / static_cast<double>(width - 1);
    case NormVariant::PerWidth: return value / static_cast<double>(width);
  }
  return value;
}

std::string_view to_string(Statistic stat) {
  return stat == Statistic::Median ? "median" : "mean";
}

std::optional<Statistic> parse_statistic(std::string_view text) {
  if (text == "median") return Statistic::Median;
  if (text == "mean") return Statistic::Mean;
  return std::nullopt;
}

void WidthSweepSeries::add_metrics(std::int64_t layer, std::int64_t step, const Metrics& metrics) {
  for (MetricName m : kAllMetrics) {
    observations.push_back({metrics.width, layer, step, m, metric_value(metrics, m)});
  }
}

std::vector<std::int64_t> WidthSweepSeries::steps() const {
  std::set<std::int64_t> s;
  for (const auto& o : observations) s.insert(o.step);
  return {s.begin(), s.end()};
}

std::vector<std::int64_t> WidthSweepSeries::widths() const {
  std::set<std::int64_t> s;
  for (const auto& o : observations) s.insert(o.width);
  return {s.begin(), s.end()};
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) {
    throw Error(ErrorCode::EmptyWidthGroup, "quantile of an empty set");
  }
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  if (frac == 0.0) return values[lo];
  return values[lo] + frac * (values[hi] - values[lo]);
}

std::vector<WidthAggregate> aggregate_layers(std::span<const WidthObservation> observations,
                                             Statistic statistic,
                                             std::span<const std::int64_t> expected_widths) {
  if (observations.empty()) {
    throw Error(ErrorCode::EmptyWidthGroup, "no observations to aggregate");
  }
  const auto& first = observations.front();
  std::map<std::int64_t, std::vector<double>> by_width;
  for (const auto& o : observations) {
    if (o.metric != first.metric || o.step != first.step) {
      throw Error(ErrorCode::MixedObservations,
                  "layer aggregation needs a single metric and step");
    }
    by_width[o.width].push_back(o.value);
  }
  for (auto w : expected_widths) {
    if (!by_width.contains(w)) {
      throw Error(ErrorCode::EmptyWidthGroup, fmt::format("width {} has no observations", w));
    }
  }

  std::vector<WidthAggregate> out;
  out.reserve(by_width.size());
  for (auto& [width, values] : by_width) {
    WidthAggregate agg;
    agg.width = width;
    agg.n_layers = values.size();
    if (statistic == Statistic::Median) {
      agg.central = quantile(values, 0.5);
    } else {
      agg.central = std::accumulate(values.begin(), values.end(), 0.0) /
                    static_cast<double>(values.size());
    }
    agg.spread = quantile(values, 0.75) - quantile(values, 0.25);
    out.push_back(agg);
  }
  return out;
}

PowerLawFit loglog_fit(std::span<const WidthPoint> points) {
  const auto n = static_cast<std::int64_t>(points.size());
  if (n < 3) {
    throw Error(ErrorCode::TooFewPoints, fmt::format("need at least 3 points, have {}", n));
  }
  std::set<double> seen;
  for (const auto& p : points) {
    if (!(p.width > 0.0) || !std::isfinite(p.width)) {
      throw Error(ErrorCode::NonPositiveValue, fmt::format("width {} is not positive", p.width));
    }
    if (!(p.value > 0.0) || !std::isfinite(p.value)) {
      throw Error(ErrorCode::NonPositiveValue,
                  fmt::format("value {} at width {} is not positive", p.value, p.width));
    }
    if (!seen.insert(p.width).second) {
      throw Error(ErrorCode::DuplicateWidth, fmt::format("width {} appears twice", p.width));
    }
  }

  Eigen::VectorXd x(n), y(n);
  for (std::int64_t i = 0; i < n; ++i) {
    x[i] = std::log(points[i].width);
    y[i] = std::log(points[i].value);
  }
  const double x_mean = x.mean();
  const double y_mean = y.mean();
  const Eigen::VectorXd dx = x.array() - x_mean;
  const Eigen::VectorXd dy = y.array() - y_mean;
  const double sxx = dx.squaredNorm();
  const double sxy = dx.dot(dy);
  const double syy = dy.squaredNorm();

  PowerLawFit fit;
  fit.n_points = n;
  fit.beta = sxy / sxx;
  fit.intercept = y_mean - fit.beta * x_mean;

  const double resolution = 16.0 * std::numeric_limits<double>::epsilon() *
                            std::max(1.0, y.cwiseAbs().maxCoeff());
  if (syy <= static_cast<double>(n) * resolution * resolution) {
    fit.degenerate = true;
    fit.beta = 0.0;
    fit.intercept = y_mean;
    fit.r2 = 0.0;
    fit.ci95 = 0.0;
    return fit;
  }

  const Eigen::VectorXd residual = dy - fit.beta * dx;
  const double sse = residual.squaredNorm();
  fit.r2 = std::clamp(1.0 - sse / syy, 0.0, 1.0);
  const double dof = static_cast<double>(n - 2);
  const double se = std::sqrt(sse / dof / sxx);
  const boost::math::students_t dist(dof);
  fit.ci95 = boost::math::quantile(dist, 0.975) * se;
  return fit;
}

StepWindow default_window(const WidthSweepSeries& series) {
  if (series.observations.empty()) return {0, 0};
  std::int64_t last = series.observations.front().step;
  for (const auto& o : series.observations) last = std::max(last, o.step);
  return {last - 999, last};
}

namespace {

// Layer-aggregated value at each (step, width) for one request.
std::map<std::int64_t, std::vector<WidthAggregate>> per_step_aggregates(
    const WidthSweepSeries& series, const FitRequest& request, const StepWindow& window,
    Statistic statistic) {
  std::map<std::int64_t, std::vector<WidthObservation>> by_step;
  for (const auto& o : series.observations) {
    if (o.metric != request.metric || o.step < window.start || o.step > window.end) continue;
    WidthObservation scaled = o;
    scaled.value = normalize_value(o.value, o.width, request.norm);
    by_step[o.step].push_back(scaled);
  }
  std::map<std::int64_t, std::vector<WidthAggregate>> out;
  for (const auto& [step, obs] : by_step) {
    out[step] = aggregate_layers(obs, statistic);
  }
  return out;
}

std::vector<WidthPoint> window_mean(
    const std::map<std::int64_t, std::vector<WidthAggregate>>& aggregates) {
  std::map<std::int64_t, std::pair<double, int>> acc;
  for (const auto& [step, row] : aggregates) {
    for (const auto& a : row) {
      auto& [sum, count] = acc[a.width];
      sum += a.central;
      ++count;
    }
  }
  std::vector<WidthPoint> points;
  for (const auto& [width, sc] : acc) {
    points.push_back({static_cast<double>(width), sc.first / sc.second});
  }
  return points;
}

}  // namespace

std::vector<WidthPoint> sweep_points(const WidthSweepSeries& series, const FitRequest& request,
                                     const FitOptions& options) {
  const StepWindow window = options.window.value_or(default_window(series));
  return window_mean(per_step_aggregates(series, request, window, options.statistic));
}

std::vector<MetricFit> fit_sweep(const WidthSweepSeries& series,
                                 std::span<const FitRequest> requests,
                                 const FitOptions& options) {
  std::vector<MetricFit> fits;
  for (const auto& req : requests) {
    const auto points = sweep_points(series, req, options);
    fits.push_back({req, loglog_fit(points)});
  }
  return fits;
}

std::vector<LayerFit> fit_sweep_per_layer(const WidthSweepSeries& series,
                                          std::span<const FitRequest> requests,
                                          const FitOptions& options) {
  const StepWindow window = options.window.value_or(default_window(series));
  std::set<std::int64_t> layers;
  for (const auto& o : series.observations) layers.insert(o.layer);

  std::vector<LayerFit> out;
  for (auto layer : layers) {
    for (const auto& req : requests) {
      // (width) -> sum, count over the window
      std::map<std::int64_t, std::pair<double, int>> acc;
      for (const auto& o : series.observations) {
        if (o.layer != layer || o.metric != req.metric) continue;
        if (o.step < window.start || o.step > window.end) continue;
        auto& [sum, count] = acc[o.width];
        sum += normalize_value(o.value, o.width, req.norm);
        ++count;
      }
      std::vector<WidthPoint> points;
      for (const auto& [w, sc] : acc) {
        points.push_back({static_cast<double>(w), sc.first / sc.second});
      }
      out.push_back({layer, {req, loglog_fit(points)}});
    }
  }
  return out;
}

std::vector<StepFit> fit_time_series(const WidthSweepSeries& series, const FitRequest& request,
                                     std::int64_t stride, Statistic statistic) {
  if (stride < 1) {
    throw Error(ErrorCode::BadParameter, "stride must be at least 1");
  }
  const auto steps = series.steps();
  std::vector<StepFit> out;
  for (std::size_t i = 0; i < steps.size(); i += static_cast<std::size_t>(stride)) {
    const std::int64_t step = steps[i];
    StepFit sf;
    sf.step = step;
    try {
      const auto aggregates = per_step_aggregates(series, request, {step, step}, statistic);
      const auto points = window_mean(aggregates);
      if (points.size() < 3) {
        throw Error(ErrorCode::TooFewWidths,
                    fmt::format("step {} has {} widths, need 3", step, points.size()));
      }
      sf.fit = loglog_fit(points);
    } catch (const Error& e) {
      sf.error = e.code();
      sf.message = e.what();
    }
    out.push_back(std::move(sf));
  }
  return out;
}

}  // namespace ffnspec
