#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ffnspec/dump.hpp"
#include "ffnspec/metrics.hpp"
#include "ffnspec/scaling_fit.hpp"

namespace ffnspec {

inline constexpr int kReportSchemaVersion = 1;

struct AuditRecord {
  std::string run;
  std::int64_t layer = 0;
  std::int64_t step = 0;
  Tap tap = Tap::PostActivation;
  std::int64_t width = 0;
  std::int64_t n_tokens = 0;
  Metrics metrics;

  friend bool operator==(const AuditRecord&, const AuditRecord&) = default;
};

/// Orders by (run, width, layer, step, tap).
void sort_records(std::vector<AuditRecord>& records);

/**
 * Audit report document:
 *
 *   {"schema":"ffnspec.audit","version":1,"records":[
 *     {"run":..,"layer":..,"step":..,"tap":..,"width":..,"n_tokens":..,
 *      "metrics":{"hard_rank":..,"soft_rank":..,"hard_util":..,"soft_util":..,
 *                 "concentration":..,"sui":..,"edim":..,"edim_rounded":..}}, ...]}
 *
 * Records are written in the order given; reals carry 17 significant digits
 * so parse_audit_json reproduces them exactly.
 */
std::string emit_json(std::span<const AuditRecord> records);
std::vector<AuditRecord> parse_audit_json(const std::string& text);

/// Converts records into fit observations (one per metric per record).
WidthSweepSeries to_series(std::span<const AuditRecord> records,
                           std::optional<Tap> tap = Tap::PostActivation);

enum class ScaleHint { Log, Linear };

std::string_view to_string(ScaleHint hint);

/// Utilizations and ranks are drawn on a log scale; concentration is linear.
ScaleHint default_scale(MetricName metric);

struct HeatmapGrid {
  MetricName metric = MetricName::HardUtil;
  std::string run;
  std::int64_t width = 0;
  ScaleHint scale = ScaleHint::Log;
  std::vector<std::int64_t> layers;  // rows
  std::vector<std::int64_t> steps;   // columns
  std::vector<std::vector<std::optional<double>>> values;  // [layer][step], nullopt = missing

  std::size_t missing_cells() const;
};

/// Records must share run and width, and hold at most one entry per
/// (layer, step).
HeatmapGrid emit_heatmap(std::span<const AuditRecord> records, MetricName metric,
                         std::optional<ScaleHint> scale = std::nullopt);

/// Missing cells serialize as null.
std::string heatmap_json(const HeatmapGrid& grid);

/**
 * Fit table CSV with columns metric,norm,beta,ci95,r2,n_points,flags.
 * Rows follow the input order. `decimals` fixes beta, ci95 and r2 to that
 * many places; a negative value prints 17 significant digits. The flags
 * column reads "none" or "degenerate".
 */
std::string emit_fit_table(std::span<const MetricFit> fits, int decimals = 3);

/// Per-layer variant: same columns preceded by a layer column.
std::string emit_layer_fit_table(std::span<const LayerFit> fits, int decimals = 3);

}  // namespace ffnspec
