#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ffnspec/covariance.hpp"
#include "ffnspec/dump.hpp"
#include "ffnspec/report.hpp"

namespace ffnspec {

struct AuditOptions {
  double tolerance = kDefaultClampTolerance;
  unsigned jobs = 1;
  std::uint64_t chunk_rows = 4096;
};

struct GroupFailure {
  std::string run;
  std::optional<GroupKey> group;  // empty when a file was rejected at scan time
  std::filesystem::path path;
  ErrorCode code;
  std::string message;
};

struct RunAudit {
  std::vector<AuditRecord> records;  // sorted by (layer, step, tap)
  std::vector<GroupFailure> failures;

  bool ok() const { return failures.empty(); }
};

/// Streams every file of a catalog group into one accumulator.
CovarianceAccumulator accumulate_group(const CatalogEntry& entry,
                                       std::uint64_t chunk_rows = 4096);

/// Covariance -> spectrum -> metrics for one group.
AuditRecord audit_group(const CatalogEntry& entry, const std::string& run,
                        const AuditOptions& options = {});

/**
 * Audits every (layer, step, tap) group of a run directory on a pool of
 * `options.jobs` workers. A failing group is recorded and the rest continue;
 * record order is independent of completion order.
 */
RunAudit audit_run(const std::filesystem::path& directory, const std::string& run,
                   const AuditOptions& options = {});

}  // namespace ffnspec
