#include "ffnspec/pipeline.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <thread>

#include "ffnspec/metrics.hpp"
#include "ffnspec/spectrum.hpp"

namespace ffnspec {

CovarianceAccumulator accumulate_group(const CatalogEntry& entry, std::uint64_t chunk_rows) {
  CovarianceAccumulator acc(entry.width);
  for (const auto& file : entry.files) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, fmt::format("cannot open {}", file.string()));
    DumpReader reader(in, file.string());
    if (reader.header().width != entry.width) {
      throw Error(ErrorCode::MixedWidthInGroup, file.string() + ": width changed since scan");
    }
    while (reader.rows_remaining() > 0) {
      const RowMatrix rows = reader.read_rows(chunk_rows);
      acc.accumulate(rows);
    }
    // Zero-token files still need the trailing-bytes check.
    reader.read_rows(0);
  }
  return acc;
}

AuditRecord audit_group(const CatalogEntry& entry, const std::string& run,
                        const AuditOptions& options) {
  const CovarianceAccumulator acc = accumulate_group(entry, options.chunk_rows);
  const Spectrum spectrum = spectrum_from_covariance(acc.finalize(), options.tolerance);
  AuditRecord record;
  record.run = run;
  record.layer = entry.key.layer;
  record.step = static_cast<std::int64_t>(entry.key.step);
  record.tap = entry.key.tap;
  record.width = entry.width;
  record.n_tokens = acc.count();
  record.metrics = audit(spectrum);
  return record;
}

RunAudit audit_run(const std::filesystem::path& directory, const std::string& run,
                   const AuditOptions& options) {
  const Catalog catalog = scan_run(directory);
  RunAudit result;
  for (const auto& rejected : catalog.rejected) {
    result.failures.push_back({run, std::nullopt, rejected.path, rejected.code, rejected.message});
  }

  const std::size_t n = catalog.entries.size();
  std::vector<std::optional<AuditRecord>> slots(n);
  std::vector<std::optional<GroupFailure>> errors(n);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      const auto& entry = catalog.entries[i];
      try {
        slots[i] = audit_group(entry, run, options);
      } catch (const Error& e) {
        errors[i] = GroupFailure{run, entry.key, entry.files.front(), e.code(), e.what()};
      }
    }
  };

  const unsigned jobs = std::clamp<unsigned>(options.jobs, 1, static_cast<unsigned>(std::max<std::size_t>(n, 1)));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (slots[i]) result.records.push_back(std::move(*slots[i]));
    if (errors[i]) result.failures.push_back(std::move(*errors[i]));
  }
  return result;
}

}  // namespace ffnspec
