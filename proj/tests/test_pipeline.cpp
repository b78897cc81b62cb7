#include <doctest.h>

#include <fstream>

#include "ffnspec/fixtures.hpp"
#include "ffnspec/metrics.hpp"
#include "ffnspec/pipeline.hpp"
#include "ffnspec/synthetic.hpp"
#include "oracles.hpp"
#include "temp_dir.hpp"

using namespace ffnspec;

namespace {

Eigen::VectorXd power_law_spectrum_values(std::int64_t width, double alpha) {
  return power_law_spectrum({alpha, width}).eigenvalues();
}

}  // namespace

TEST_SUITE("pipeline") {
  TEST_CASE("disk path matches in-memory metrics") {
    TempDir dir;
    GaussianTokenSampler sampler(power_law_spectrum_values(48, 1.1), 11);
    const RowMatrix a = sampler.sample(200);
    const RowMatrix b = sampler.sample(150);
    DumpHeader h;
    h.dtype = DType::F64;
    h.layer = 2;
    h.step = 40;
    write_dump(dir.path() / "part0.spdc", h, a);
    std::filesystem::create_directories(dir.path() / "nested");
    write_dump(dir.path() / "nested" / "part1.spdc", h, b);

    RowMatrix all(350, 48);
    all << a, b;
    const Metrics expected = audit(spectrum_from_covariance(oracle::two_pass_covariance(all)));

    for (std::uint64_t chunk : {1u, 37u, 4096u}) {
      AuditOptions opts;
      opts.chunk_rows = chunk;
      const RunAudit result = audit_run(dir.path(), "probe", opts);
      REQUIRE(result.ok());
      REQUIRE(result.records.size() == 1);
      const auto& r = result.records[0];
      CHECK(r.run == "probe");
      CHECK(r.layer == 2);
      CHECK(r.step == 40);
      CHECK(r.n_tokens == 350);
      CHECK(r.width == 48);
      CHECK(std::abs(r.metrics.hard_rank - expected.hard_rank) <= 1e-10 * expected.hard_rank);
      CHECK(std::abs(r.metrics.soft_rank - expected.soft_rank) <= 1e-10 * expected.soft_rank);
      CHECK(std::abs(r.metrics.concentration - expected.concentration) <= 1e-10);
      CHECK(std::abs(r.metrics.sui - expected.sui) <= 1e-10);
    }
  }

  TEST_CASE("failing groups do not stop the run") {
    TempDir dir;
    GaussianTokenSampler sampler(Eigen::VectorXd::Ones(8), 3);
    for (std::uint32_t layer = 0; layer < 3; ++layer) {
      DumpHeader h;
      h.layer = layer;
      write_dump(dir.path() / ("L" + std::to_string(layer) + ".spdc"), h, sampler.sample(40));
    }
    // a group with a single token cannot form a covariance
    DumpHeader lonely;
    lonely.layer = 9;
    write_dump(dir.path() / "L9.spdc", lonely, sampler.sample(1));
    // a truncated payload is only detected when the group is streamed
    {
      std::ifstream in(dir.path() / "L1.spdc", std::ios::binary);
      std::string bytes((std::istreambuf_iterator<char>(in)), {});
      in.close();
      std::ofstream out(dir.path() / "L1.spdc", std::ios::binary | std::ios::trunc);
      out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 5));
    }

    AuditOptions opts;
    opts.jobs = 3;
    const RunAudit result = audit_run(dir.path(), "r", opts);
    CHECK(result.records.size() == 2);
    CHECK(result.records[0].layer == 0);
    CHECK(result.records[1].layer == 2);
    REQUIRE(result.failures.size() == 2);
    std::vector<ErrorCode> codes;
    for (const auto& f : result.failures) codes.push_back(f.code);
    std::sort(codes.begin(), codes.end());
    std::vector<ErrorCode> expected = {ErrorCode::TruncatedPayload, ErrorCode::InsufficientTokens};
    std::sort(expected.begin(), expected.end());
    CHECK(codes == expected);
  }

  TEST_CASE("job count does not change results") {
    TempDir dir;
    SweepFixture f;
    f.widths = {64};
    f.layers = 4;
    f.steps = {10, 20};
    const auto runs = write_sweep_fixture(dir.path(), f);
    REQUIRE(runs.size() == 1);
    AuditOptions serial, parallel;
    parallel.jobs = 4;
    const auto a = audit_run(runs[0], "w64", serial);
    const auto b = audit_run(runs[0], "w64", parallel);
    REQUIRE(a.ok());
    CHECK(a.records.size() == 8);
    CHECK(a.records == b.records);
  }
}

TEST_SUITE("fixtures") {
  TEST_CASE("soft rank targets are hit by the population spectrum") {
    for (double target : {5.0, 40.0, 200.0}) {
      const double alpha = alpha_for_soft_rank(512, target);
      CHECK(soft_rank(power_law_spectrum({alpha, 512})) ==
            doctest::Approx(target).epsilon(1e-8));
    }
  }

  TEST_CASE("sampler covariance converges to the population") {
    GaussianTokenSampler sampler(power_law_spectrum_values(16, 1.0), 5);
    const RowMatrix x = sampler.sample(40000);
    const Eigen::MatrixXd pop = sampler.population_covariance();
    const Eigen::MatrixXd est = oracle::two_pass_covariance(x);
    CHECK((est - pop).norm() / pop.norm() < 0.05);
  }
}
