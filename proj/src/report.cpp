#include "ffnspec/report.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <map>
#include <set>
#include <tuple>

#include <json.hpp>

namespace ffnspec {

namespace {

std::string real(double v) { return fmt::format("{:.17g}", v); }

std::string quoted(const std::string& s) { return nlohmann::json(s).dump(); }

std::string fixed(double v, int decimals) {
  if (decimals < 0) return real(v);
  return fmt::format("{:.{}f}", v, decimals);
}

}  // namespace

void sort_records(std::vector<AuditRecord>& records) {
  std::stable_sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
    return std::tie(a.run, a.width, a.layer, a.step, a.tap) <
           std::tie(b.run, b.width, b.layer, b.step, b.tap);
  });
}

std::string emit_json(std::span<const AuditRecord> records) {
  std::string out = fmt::format("{{\"schema\":\"ffnspec.audit\",\"version\":{},\"records\":[",
                                kReportSchemaVersion);
  bool first = true;
  for (const auto& r : records) {
    const auto& m = r.metrics;
    out += first ? "\n" : ",\n";
    first = false;
    out += fmt::format(
        "{{\"run\":{},\"layer\":{},\"step\":{},\"tap\":\"{}\",\"width\":{},\"n_tokens\":{},"
        "\"metrics\":{{\"hard_rank\":{},\"soft_rank\":{},\"hard_util\":{},\"soft_util\":{},"
        "\"concentration\":{},\"sui\":{},\"edim\":{},\"edim_rounded\":{}}}}}",
        quoted(r.run), r.layer, r.step, to_string(r.tap), r.width, r.n_tokens, real(m.hard_rank),
        real(m.soft_rank), real(m.hard_util), real(m.soft_util), real(m.concentration),
        real(m.sui), real(m.edim), m.edim_rounded());
  }
  out += "\n]}\n";
  return out;
}

std::vector<AuditRecord> parse_audit_json(const std::string& text) {
  std::vector<AuditRecord> records;
  try {
    const auto doc = nlohmann::json::parse(text);
    if (doc.value("schema", "") != "ffnspec.audit") {
      throw Error(ErrorCode::BadReport, "not an ffnspec audit report");
    }
    if (doc.value("version", 0) != kReportSchemaVersion) {
      throw Error(ErrorCode::BadReport, "unsupported report version");
    }
    for (const auto& j : doc.at("records")) {
      AuditRecord r;
      r.run = j.at("run").get<std::string>();
      r.layer = j.at("layer").get<std::int64_t>();
      r.step = j.at("step").get<std::int64_t>();
      const auto tap = parse_tap(j.at("tap").get<std::string>());
      if (!tap) throw Error(ErrorCode::BadReport, "unknown tap");
      r.tap = *tap;
      r.width = j.at("width").get<std::int64_t>();
      r.n_tokens = j.at("n_tokens").get<std::int64_t>();
      const auto& m = j.at("metrics");
      r.metrics.width = r.width;
      r.metrics.hard_rank = m.at("hard_rank").get<double>();
      r.metrics.soft_rank = m.at("soft_rank").get<double>();
      r.metrics.hard_util = m.at("hard_util").get<double>();
      r.metrics.soft_util = m.at("soft_util").get<double>();
      r.metrics.concentration = m.at("concentration").get<double>();
      r.metrics.sui = m.at("sui").get<double>();
      r.metrics.edim = m.at("edim").get<double>();
      records.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::BadReport, e.what());
  }
  return records;
}

WidthSweepSeries to_series(std::span<const AuditRecord> records, std::optional<Tap> tap) {
  WidthSweepSeries series;
  for (const auto& r : records) {
    if (tap && r.tap != *tap) continue;
    series.add_metrics(r.layer, r.step, r.metrics);
  }
  return series;
}

std::string_view to_string(ScaleHint hint) { return hint == ScaleHint::Log ? "log" : "linear"; }

ScaleHint default_scale(MetricName metric) {
  return metric == MetricName::Concentration ? ScaleHint::Linear : ScaleHint::Log;
}

std::size_t HeatmapGrid::missing_cells() const {
  std::size_t n = 0;
  for (const auto& row : values) {
    n += static_cast<std::size_t>(std::count(row.begin(), row.end(), std::nullopt));
  }
  return n;
}

HeatmapGrid emit_heatmap(std::span<const AuditRecord> records, MetricName metric,
                         std::optional<ScaleHint> scale) {
  if (records.empty()) {
    throw Error(ErrorCode::EmptyRecordSet, "no records for heatmap");
  }
  HeatmapGrid grid;
  grid.metric = metric;
  grid.run = records.front().run;
  grid.width = records.front().width;
  grid.scale = scale.value_or(default_scale(metric));

  std::set<std::int64_t> layers, steps;
  for (const auto& r : records) {
    if (r.run != grid.run || r.width != grid.width) {
      throw Error(ErrorCode::MixedObservations,
                  fmt::format("heatmap mixes run '{}' width {} with run '{}' width {}", grid.run,
                              grid.width, r.run, r.width));
    }
    layers.insert(r.layer);
    steps.insert(r.step);
  }
  grid.layers.assign(layers.begin(), layers.end());
  grid.steps.assign(steps.begin(), steps.end());
  grid.values.assign(grid.layers.size(),
                     std::vector<std::optional<double>>(grid.steps.size(), std::nullopt));

  auto index = [](const std::vector<std::int64_t>& axis, std::int64_t v) {
    return static_cast<std::size_t>(std::lower_bound(axis.begin(), axis.end(), v) - axis.begin());
  };
  for (const auto& r : records) {
    auto& cell = grid.values[index(grid.layers, r.layer)][index(grid.steps, r.step)];
    if (cell) {
      throw Error(ErrorCode::DuplicateCell,
                  fmt::format("two records for layer {} step {}", r.layer, r.step));
    }
    cell = metric_value(r.metrics, metric);
  }
  return grid;
}

std::string heatmap_json(const HeatmapGrid& grid) {
  auto join = [](const std::vector<std::int64_t>& v) {
    return fmt::format("{}", fmt::join(v, ","));
  };
  std::string out = fmt::format(
      "{{\"schema\":\"ffnspec.heatmap\",\"version\":{},\"metric\":\"{}\",\"run\":{},"
      "\"width\":{},\"scale\":\"{}\",\"missing\":{},\n\"layers\":[{}],\n\"steps\":[{}],\n"
      "\"values\":[",
      kReportSchemaVersion, to_string(grid.metric), quoted(grid.run), grid.width,
      to_string(grid.scale), grid.missing_cells(), join(grid.layers), join(grid.steps));
  for (std::size_t i = 0; i < grid.values.size(); ++i) {
    out += i == 0 ? "\n[" : ",\n[";
    for (std::size_t j = 0; j < grid.values[i].size(); ++j) {
      if (j > 0) out += ',';
      out += grid.values[i][j] ? real(*grid.values[i][j]) : "null";
    }
    out += ']';
  }
  out += "\n]}\n";
  return out;
}

namespace {

std::string fit_columns(const MetricFit& f, int decimals) {
  return fmt::format("{},{},{},{},{},{},{}", to_string(f.request.metric),
                     to_string(f.request.norm), fixed(f.fit.beta, decimals),
                     fixed(f.fit.ci95, decimals), fixed(f.fit.r2, decimals), f.fit.n_points,
                     f.fit.degenerate ? "degenerate" : "none");
}

}  // namespace

std::string emit_fit_table(std::span<const MetricFit> fits, int decimals) {
  std::string out = "metric,norm,beta,ci95,r2,n_points,flags\n";
  for (const auto& f : fits) out += fit_columns(f, decimals) + '\n';
  return out;
}

std::string emit_layer_fit_table(std::span<const LayerFit> fits, int decimals) {
  std::string out = "layer,metric,norm,beta,ci95,r2,n_points,flags\n";
  for (const auto& f : fits) out += fmt::format("{},{}\n", f.layer, fit_columns(f.fit, decimals));
  return out;
}

}  // namespace ffnspec
