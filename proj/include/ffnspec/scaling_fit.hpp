#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ffnspec/error.hpp"
#include "ffnspec/metrics.hpp"

namespace ffnspec {

enum class MetricName { HardRank, SoftRank, HardUtil, SoftUtil, Concentration, Sui, Edim };

inline constexpr MetricName kAllMetrics[] = {
    MetricName::HardRank, MetricName::SoftRank,      MetricName::HardUtil, MetricName::SoftUtil,
    MetricName::Concentration, MetricName::Sui, MetricName::Edim};

std::string_view to_string(MetricName name);
std::optional<MetricName> parse_metric(std::string_view text);
double metric_value(const Metrics& metrics, MetricName name);

/// How values are rescaled by width before fitting.
enum class NormVariant {
  Raw,               // value as observed
  PerWidthMinusOne,  // value / (D - 1)
  PerWidth,          // value / D, under which the slope shifts by exactly -1
};

std::string_view to_string(NormVariant norm);
std::optional<NormVariant> parse_norm(std::string_view text);
double normalize_value(double value, std::int64_t width, NormVariant norm);

enum class Statistic { Median, Mean };

std::string_view to_string(Statistic stat);
std::optional<Statistic> parse_statistic(std::string_view text);

struct WidthObservation {
  std::int64_t width = 0;
  std::int64_t layer = 0;
  std::int64_t step = 0;
  MetricName metric = MetricName::SoftRank;
  double value = 0.0;
};

/// Observations from a width sweep: any mix of widths, layers, steps, metrics.
struct WidthSweepSeries {
  std::vector<WidthObservation> observations;

  void add(const WidthObservation& obs) { observations.push_back(obs); }
  void add_metrics(std::int64_t layer, std::int64_t step, const Metrics& metrics);
  std::vector<std::int64_t> steps() const;
  std::vector<std::int64_t> widths() const;
};

struct WidthAggregate {
  std::int64_t width = 0;
  double central = 0.0;
  double spread = 0.0;  // interquartile range across layers
  std::size_t n_layers = 0;
};

/// Linear-interpolation quantile (type 7) of unsorted values, q in [0, 1].
double quantile(std::vector<double> values, double q);

/**
 * Collapses layers into one value per width.
 *
 * All observations must share metric and step. The spread is always the
 * interquartile range across layers. When `expected_widths` is given, every
 * listed width must have at least one observation.
 */
std::vector<WidthAggregate> aggregate_layers(
    std::span<const WidthObservation> observations, Statistic statistic = Statistic::Median,
    std::span<const std::int64_t> expected_widths = {});

struct WidthPoint {
  double width = 0.0;
  double value = 0.0;
};

struct PowerLawFit {
  double beta = 0.0;
  double intercept = 0.0;  // natural-log space
  double r2 = 0.0;
  double ci95 = 0.0;  // half-width of the two-sided 95% t-interval on beta
  std::int64_t n_points = 0;
  bool degenerate = false;  // total variance of log values is zero
};

/// OLS of ln(value) on ln(width).
PowerLawFit loglog_fit(std::span<const WidthPoint> points);

struct StepWindow {
  std::int64_t start = 0;  // inclusive
  std::int64_t end = 0;    // inclusive
};

/// Final 1000 training steps of the series: (max_step - 1000, max_step].
StepWindow default_window(const WidthSweepSeries& series);

struct FitRequest {
  MetricName metric = MetricName::SoftRank;
  NormVariant norm = NormVariant::Raw;
};

struct FitOptions {
  std::optional<StepWindow> window;  // defaults to default_window()
  Statistic statistic = Statistic::Median;
};

struct MetricFit {
  FitRequest request;
  PowerLawFit fit;
};

/// Per-width points for one request: layer aggregate per step, then the mean
/// over steps inside the window.
std::vector<WidthPoint> sweep_points(const WidthSweepSeries& series, const FitRequest& request,
                                     const FitOptions& options = {});

/// One pooled fit per request, on layer aggregates averaged over the window.
std::vector<MetricFit> fit_sweep(const WidthSweepSeries& series,
                                 std::span<const FitRequest> requests,
                                 const FitOptions& options = {});

struct LayerFit {
  std::int64_t layer = 0;
  MetricFit fit;
};

/// Alternative to pooling: one fit per layer, on that layer's window mean.
std::vector<LayerFit> fit_sweep_per_layer(const WidthSweepSeries& series,
                                          std::span<const FitRequest> requests,
                                          const FitOptions& options = {});

struct StepFit {
  std::int64_t step = 0;
  std::optional<PowerLawFit> fit;
  std::optional<ErrorCode> error;
  std::string message;
};

/**
 * Fits every `stride`-th step (in ascending order, starting from the first).
 * Steps that cannot be fitted are returned with an error code instead of
 * being dropped; fewer than three widths gives TooFewWidths.
 */
std::vector<StepFit> fit_time_series(const WidthSweepSeries& series, const FitRequest& request,
                                     std::int64_t stride = 1,
                                     Statistic statistic = Statistic::Median);

}  // namespace ffnspec
