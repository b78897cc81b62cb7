#include <doctest.h>

#include <random>

#include "ffnspec/report.hpp"
#include "ffnspec/synthetic.hpp"

using namespace ffnspec;

namespace {

AuditRecord make_record(std::string run, std::int64_t width, std::int64_t layer, std::int64_t step,
                        double alpha) {
  AuditRecord r;
  r.run = std::move(run);
  r.width = width;
  r.layer = layer;
  r.step = step;
  r.n_tokens = 16 * width;
  r.metrics = audit(power_law_spectrum({alpha, width}));
  return r;
}

std::vector<AuditRecord> grid(std::int64_t layers, std::int64_t steps) {
  std::vector<AuditRecord> out;
  for (std::int64_t l = 0; l < layers; ++l)
    for (std::int64_t s = 0; s < steps; ++s)
      out.push_back(make_record("r", 64, l, 100 * s, 0.5 + 0.05 * static_cast<double>(l + s)));
  return out;
}

}  // namespace

TEST_SUITE("report") {
  TEST_CASE("json round trip") {
    std::vector<AuditRecord> records = grid(12, 3);
    std::shuffle(records.begin(), records.end(), std::mt19937_64(3));
    sort_records(records);
    const std::string text = emit_json(records);
    const auto back = parse_audit_json(text);
    REQUIRE(back.size() == 36);
    CHECK(back == records);
    for (std::size_t i = 1; i < back.size(); ++i) {
      CHECK(std::tie(back[i - 1].layer, back[i - 1].step) < std::tie(back[i].layer, back[i].step));
    }
    CHECK(emit_json(back) == text);
  }

  TEST_CASE("sort order is run, width, layer, step, tap") {
    std::vector<AuditRecord> r = {make_record("b", 64, 0, 0, 1.0), make_record("a", 128, 1, 0, 1.0),
                                  make_record("a", 64, 2, 5, 1.0), make_record("a", 64, 2, 1, 1.0)};
    r.push_back(r[3]);
    r.back().tap = Tap::PreActivation;
    sort_records(r);
    CHECK(r[0].run == "a");
    CHECK(r[0].width == 64);
    CHECK(r[0].step == 1);
    CHECK(r[0].tap == Tap::PostActivation);
    CHECK(r[1].tap == Tap::PreActivation);
    CHECK(r[2].step == 5);
    CHECK(r[3].width == 128);
    CHECK(r[4].run == "b");
  }

  TEST_CASE("edim is stored and rounded") {
    AuditRecord r;
    r.run = "x";
    r.width = 3072;
    r.metrics.width = 3072;
    r.metrics.sui = 18.347 / 3071.0;
    r.metrics.edim = 19.347;
    const std::string text = emit_json(std::vector<AuditRecord>{r});
    CHECK(text.find("\"edim_rounded\":19") != std::string::npos);
    const auto back = parse_audit_json(text);
    CHECK(back[0].metrics.edim == doctest::Approx(19.35).epsilon(1e-3));
    CHECK(back[0].metrics.edim_rounded() == 19);
  }

  TEST_CASE("malformed reports") {
    for (const char* text : {"", "[]", "{\"schema\":\"other\",\"version\":1,\"records\":[]}",
                             "{\"schema\":\"ffnspec.audit\",\"version\":2,\"records\":[]}",
                             "{\"schema\":\"ffnspec.audit\",\"version\":1,\"records\":[{}]}"}) {
      try {
        parse_audit_json(text);
        FAIL("expected BadReport for " << text);
      } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::BadReport);
      }
    }
  }

  TEST_CASE("series from records") {
    auto records = grid(2, 2);
    records.push_back(records[0]);
    records.back().tap = Tap::PreActivation;
    const auto series = to_series(records);
    CHECK(series.observations.size() == 4 * std::size(kAllMetrics));
    CHECK(to_series(records, std::nullopt).observations.size() == 5 * std::size(kAllMetrics));
  }
}

TEST_SUITE("heatmap") {
  TEST_CASE("full grid") {
    const auto records = grid(12, 10);
    const auto g = emit_heatmap(records, MetricName::SoftUtil);
    CHECK(g.layers.size() == 12);
    CHECK(g.steps.size() == 10);
    CHECK(g.missing_cells() == 0);
    CHECK(g.scale == ScaleHint::Log);
    CHECK(*g.values[3][4] == records[3 * 10 + 4].metrics.soft_util);
    CHECK(emit_heatmap(records, MetricName::Concentration).scale == ScaleHint::Linear);
    CHECK(emit_heatmap(records, MetricName::Concentration, ScaleHint::Log).scale == ScaleHint::Log);
  }

  TEST_CASE("missing cell") {
    auto records = grid(12, 10);
    records.erase(records.begin() + 25);
    const auto g = emit_heatmap(records, MetricName::HardUtil);
    CHECK(g.missing_cells() == 1);
    CHECK_FALSE(g.values[2][5].has_value());
    const auto json = heatmap_json(g);
    CHECK(json.find("null") != std::string::npos);
    CHECK(json.find("\"scale\":\"log\"") != std::string::npos);
  }

  TEST_CASE("invalid record sets") {
    auto check_code = [](std::vector<AuditRecord> r, ErrorCode code) {
      try {
        emit_heatmap(r, MetricName::Sui);
        FAIL("expected error");
      } catch (const Error& e) {
        CHECK(e.code() == code);
      }
    };
    check_code({}, ErrorCode::EmptyRecordSet);
    auto dup = grid(2, 2);
    dup.push_back(dup[0]);
    check_code(dup, ErrorCode::DuplicateCell);
    auto mixed = grid(2, 2);
    mixed[1].width = 128;
    check_code(mixed, ErrorCode::MixedObservations);
  }
}

TEST_SUITE("fit table") {
  TEST_CASE("columns and formatting") {
    MetricFit a{{MetricName::SoftRank, NormVariant::Raw}, {}};
    a.fit.beta = 1.06;
    a.fit.ci95 = 0.0123;
    a.fit.r2 = 0.93;
    a.fit.n_points = 4;
    MetricFit b{{MetricName::SoftUtil, NormVariant::PerWidthMinusOne}, {}};
    b.fit.n_points = 3;
    b.fit.degenerate = true;
    const std::vector<MetricFit> fits = {a, b};
    const auto csv = emit_fit_table(fits);
    CHECK(csv ==
          "metric,norm,beta,ci95,r2,n_points,flags\n"
          "soft_rank,raw,1.060,0.012,0.930,4,none\n"
          "soft_util,per_width_minus_one,0.000,0.000,0.000,3,degenerate\n");
    CHECK(emit_fit_table(fits) == csv);
    CHECK(emit_fit_table(fits, 1).find("1.1,0.0,0.9") != std::string::npos);
    CHECK(emit_fit_table(fits, -1).find("1.0600000000000001") != std::string::npos);
  }

  TEST_CASE("per layer") {
    LayerFit f{3, {{MetricName::HardRank, NormVariant::Raw}, {}}};
    f.fit.fit.beta = 0.5;
    f.fit.fit.n_points = 4;
    const std::vector<LayerFit> fits = {f};
    const auto csv = emit_layer_fit_table(fits);
    CHECK(csv.substr(0, csv.find('\n')) == "layer,metric,norm,beta,ci95,r2,n_points,flags");
    CHECK(csv.find("\n3,hard_rank,raw,0.500,") != std::string::npos);
  }
}
