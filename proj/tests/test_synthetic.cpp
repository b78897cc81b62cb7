#include <doctest.h>

#include "ffnspec/metrics.hpp"
#include "ffnspec/synthetic.hpp"
#include "oracles.hpp"

using namespace ffnspec;

TEST_SUITE("synthetic") {
  TEST_CASE("flat and harmonic spectra") {
    const auto flat = power_law_spectrum({0.0, 4});
    for (int i = 0; i < 4; ++i) CHECK(flat[i] == doctest::Approx(0.25));

    const auto s = power_law_spectrum({1.0, 768});
    CHECK(s.total() == doctest::Approx(1.0));
    // lambda_1 share is 1 / H_D for alpha = 1
    CHECK(s[0] == doctest::Approx(1.0 / oracle::harmonic(768)).epsilon(1e-13));
    CHECK(std::abs(100.0 * s[0] - 13.8) <= 0.05);

    const auto steep = power_law_spectrum({2.0, 768});
    CHECK(std::abs(100.0 * steep[0] - 60.8) <= 0.05);
    for (Eigen::Index i = 1; i < 768; ++i) CHECK(steep[i] < steep[i - 1]);
  }

  TEST_CASE("bad parameters") {
    CHECK_THROWS_AS(power_law_spectrum({1.0, 1}), Error);
    CHECK_THROWS_AS(power_law_spectrum({-0.5, 10}), Error);
    const auto s = power_law_spectrum({1.0, 10});
    for (double f : {0.0, -0.1, 1.5}) {
      try {
        cumulative_variance_at(s, f);
        FAIL("expected BadFraction");
      } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::BadFraction);
      }
    }
  }

  TEST_CASE("component count rounds up") {
    CHECK(component_count(0.10, 768) == 77);
    CHECK(component_count(0.10, 3072) == 308);
    CHECK(component_count(0.25, 768) == 192);
    CHECK(component_count(0.5, 10) == 5);
    CHECK(component_count(0.7, 10) == 7);
    CHECK(component_count(0.3, 10) == 3);
    CHECK(component_count(1e-6, 10) == 1);
    CHECK(component_count(1.0, 10) == 10);
  }

  TEST_CASE("cumulative variance") {
    CHECK(cumulative_variance_at(power_law_spectrum({0.0, 8}), 0.5) == 0.5);
    const auto s768 = power_law_spectrum({1.0, 768});
    // harmonic-sum oracle: H_77 / H_768
    CHECK(cumulative_variance_at(s768, 0.10) ==
          doctest::Approx(oracle::harmonic(77) / oracle::harmonic(768)).epsilon(1e-13));
    CHECK(std::abs(100.0 * cumulative_variance_at(s768, 0.10) - 68.2) <= 0.05);
    // round-to-nearest would take 76 components and miss the reference value
    CHECK(std::abs(100.0 * oracle::harmonic(76) / oracle::harmonic(768) - 68.2) > 0.05);
    CHECK(std::abs(100.0 * cumulative_variance_at(power_law_spectrum({1.0, 2048}), 0.10) - 72.0) <=
          0.05);

    double previous = 0.0;
    for (double f = 0.01; f <= 1.0; f += 0.01) {
      const double v = cumulative_variance_at(s768, f);
      CHECK(v >= previous);
      previous = v;
    }
  }

  TEST_CASE("table rows") {
    const auto row = concentration_row({1.5, 3072});
    CHECK(std::abs(100 * row.top1_share - 38.8) <= 0.05);
    CHECK(std::abs(100 * row.var_at_10pct - 97.0) <= 0.05);
    CHECK(std::abs(100 * row.var_at_25pct - 98.6) <= 0.05);
    CHECK(std::abs(100 * row.var_at_50pct - 99.4) <= 0.05);
    CHECK(std::abs(row.concentration - 0.97) <= 0.005);

    CHECK(std::abs(concentration_row({0.8, 768}).concentration - 0.57) <= 0.005);

    const auto steep = concentration_row({2.0, 3072});
    CHECK(std::abs(100 * steep.var_at_10pct - 99.8) <= 0.05);
    CHECK(std::abs(steep.concentration - 1.00) <= 0.005);
  }

  TEST_CASE("width invariance and monotonicity") {
    const auto rows = table3_report(kDefaultAlphas, kDefaultWidths);
    REQUIRE(rows.size() == 15);
    double lo = 1.0, hi = 0.0;
    for (const auto& r : rows) {
      CHECK(r.var_at_10pct <= r.var_at_25pct);
      CHECK(r.var_at_25pct <= r.var_at_50pct);
      CHECK(r.top1_share > 0.0);
      CHECK(r.var_at_50pct <= 1.0);
      if (r.alpha == 2.0) {
        lo = std::min(lo, r.top1_share);
        hi = std::max(hi, r.top1_share);
      }
    }
    CHECK(hi - lo < 0.001);
    for (std::size_t w = 0; w < kDefaultWidths.size(); ++w) {
      for (std::size_t a = 1; a < kDefaultAlphas.size(); ++a) {
        const auto& prev = rows[(a - 1) * kDefaultWidths.size() + w];
        const auto& cur = rows[a * kDefaultWidths.size() + w];
        CHECK(cur.concentration > prev.concentration);
        CHECK(cur.top1_share > prev.top1_share);
      }
    }
  }

  TEST_CASE("deterministic csv") {
    const auto rows = table3_report(kDefaultAlphas, kDefaultWidths);
    const auto a = table3_csv(rows);
    CHECK(a == table3_csv(table3_report(kDefaultAlphas, kDefaultWidths)));
    const auto header = a.substr(0, a.find('\n'));
    CHECK(header ==
          "alpha,top1_768,top1_2048,top1_3072,var10_768,var10_2048,var10_3072,var25_768,"
          "var25_2048,var25_3072,var50_768,var50_2048,var50_3072,sc_768,sc_2048,sc_3072");
    const auto display = table3_csv(rows, true);
    CHECK(display.find("\n1.0,13.8%,12.2%,11.6%,68.2%,72.0%,73.3%") != std::string::npos);
  }

  TEST_CASE("flat spectrum grid") {
    const std::vector<double> alphas = {0.0};
    const std::vector<std::int64_t> widths = {10};
    const auto rows = table3_report(alphas, widths);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].concentration == doctest::Approx(0.0));
    CHECK(rows[0].top1_share == doctest::Approx(0.1));
    CHECK(rows[0].var_at_10pct == doctest::Approx(0.1));
    CHECK(rows[0].var_at_25pct == doctest::Approx(0.3));  // ceil(2.5) components
    CHECK(rows[0].var_at_50pct == doctest::Approx(0.5));
  }
}
