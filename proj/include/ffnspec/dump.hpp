#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ffnspec/error.hpp"

namespace ffnspec {

/*
 * SPDC activation dump, format version 1.
 *
 * A 64-byte little-endian header followed by a row-major payload of
 * n_tokens x width values (one row per token).
 *
 *   offset size  field
 *        0    4  magic "SPDC"
 *        4    2  u16 format_version (1)
 *        6    1  u8  dtype (0 = f32, 1 = f64)
 *        7    1  u8  tap (0 = post_activation, 1 = pre_activation)
 *        8    4  u32 width D
 *       12    4  u32 layer
 *       16    8  u64 n_tokens N
 *       24    8  u64 step
 *       32    4  u32 width_multiplier_milli (D/d * 1000, e.g. 2670)
 *       36   28  reserved, written as zero, ignored on read
 *
 * The payload is exactly N * D * sizeof(dtype) bytes; anything shorter is
 * TruncatedPayload, anything longer is TrailingBytes. f32 payloads are widened
 * to f64 on read.
 */

inline constexpr std::array<char, 4> kDumpMagic = {'S', 'P', 'D', 'C'};
inline constexpr std::uint16_t kDumpVersion = 1;
inline constexpr std::size_t kDumpHeaderSize = 64;

enum class DType : std::uint8_t { F32 = 0, F64 = 1 };
enum class Tap : std::uint8_t { PostActivation = 0, PreActivation = 1 };

std::string_view to_string(DType dtype);
std::string_view to_string(Tap tap);
std::optional<Tap> parse_tap(std::string_view text);
std::size_t dtype_size(DType dtype);

struct DumpHeader {
  std::uint16_t format_version = kDumpVersion;
  DType dtype = DType::F32;
  Tap tap = Tap::PostActivation;
  std::uint32_t width = 0;
  std::uint64_t n_tokens = 0;
  std::uint32_t layer = 0;
  std::uint64_t step = 0;
  std::uint32_t width_multiplier_milli = 0;

  std::uint64_t payload_bytes() const { return n_tokens * width * dtype_size(dtype); }

  friend bool operator==(const DumpHeader&, const DumpHeader&) = default;
};

std::array<unsigned char, kDumpHeaderSize> encode_header(const DumpHeader& header);
DumpHeader decode_header(std::span<const unsigned char, kDumpHeaderSize> bytes);

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct ActivationBatch {
  DumpHeader header;
  RowMatrix rows;
};

/**
 * Incremental reader over one dump stream: the header is parsed and validated
 * on construction, then rows are pulled in blocks so large dumps never need
 * to be resident at once.
 */
class DumpReader {
 public:
  /// `label` names the source in error messages.
  DumpReader(std::istream& in, std::string label = "<stream>");

  const DumpHeader& header() const noexcept { return header_; }
  std::uint64_t rows_remaining() const noexcept { return header_.n_tokens - rows_read_; }

  /// Next block of at most max_rows rows; empty once the payload is consumed.
  /// After the last row, checks that no bytes follow.
  RowMatrix read_rows(std::uint64_t max_rows);

 private:
  std::istream& in_;
  std::string label_;
  DumpHeader header_;
  std::uint64_t rows_read_ = 0;
  bool tail_checked_ = false;
};

ActivationBatch read_dump(std::istream& in, const std::string& label = "<stream>");
ActivationBatch read_dump(const std::filesystem::path& path);
DumpHeader read_dump_header(const std::filesystem::path& path);

/// Writes rows in the header's dtype. header.width and header.n_tokens are
/// taken from the matrix shape.
void write_dump(std::ostream& out, DumpHeader header, const Eigen::Ref<const RowMatrix>& rows);
void write_dump(const std::filesystem::path& path, DumpHeader header,
                const Eigen::Ref<const RowMatrix>& rows);

struct GroupKey {
  std::uint32_t layer = 0;
  std::uint64_t step = 0;
  Tap tap = Tap::PostActivation;

  friend auto operator<=>(const GroupKey&, const GroupKey&) = default;
};

struct CatalogEntry {
  GroupKey key;
  std::uint32_t width = 0;
  std::uint32_t width_multiplier_milli = 0;
  std::uint64_t n_tokens = 0;  // summed over files
  std::vector<std::filesystem::path> files;  // sorted
};

struct RejectedFile {
  std::filesystem::path path;
  ErrorCode code;
  std::string message;
};

struct Catalog {
  std::vector<CatalogEntry> entries;  // sorted by (layer, step, tap)
  std::vector<RejectedFile> rejected;  // files whose header did not parse
};

/**
 * Groups every regular file under `directory` (recursively) by the
 * (layer, step, tap) recorded in its header; file names are ignored. All
 * files in a group must agree on width or MixedWidthInGroup is thrown.
 */
Catalog scan_run(const std::filesystem::path& directory);

}  // namespace ffnspec
