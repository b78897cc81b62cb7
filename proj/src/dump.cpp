#include "ffnspec/dump.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <map>

namespace ffnspec {

static_assert(std::endian::native == std::endian::little,
              "dump encoding assumes a little-endian host");

std::string_view to_string(DType dtype) { return dtype == DType::F32 ? "f32" : "f64"; }

std::string_view to_string(Tap tap) {
  return tap == Tap::PostActivation ? "post_activation" : "pre_activation";
}

std::optional<Tap> parse_tap(std::string_view text) {
  if (text == "post_activation" || text == "post") return Tap::PostActivation;
  if (text == "pre_activation" || text == "pre") return Tap::PreActivation;
  return std::nullopt;
}

std::size_t dtype_size(DType dtype) { return dtype == DType::F32 ? 4 : 8; }

namespace {

template <typename T>
void put(unsigned char* dst, T value) {
  std::memcpy(dst, &value, sizeof(T));
}

template <typename T>
T get(const unsigned char* src) {
  T value;
  std::memcpy(&value, src, sizeof(T));
  return value;
}

}  // namespace

std::array<unsigned char, kDumpHeaderSize> encode_header(const DumpHeader& h) {
  std::array<unsigned char, kDumpHeaderSize> b{};
  std::memcpy(b.data(), kDumpMagic.data(), 4);
  put<std::uint16_t>(b.data() + 4, h.format_version);
  b[6] = static_cast<unsigned char>(h.dtype);
  b[7] = static_cast<unsigned char>(h.tap);
  put<std::uint32_t>(b.data() + 8, h.width);
  put<std::uint32_t>(b.data() + 12, h.layer);
  put<std::uint64_t>(b.data() + 16, h.n_tokens);
  put<std::uint64_t>(b.data() + 24, h.step);
  put<std::uint32_t>(b.data() + 32, h.width_multiplier_milli);
  return b;
}

DumpHeader decode_header(std::span<const unsigned char, kDumpHeaderSize> b) {
  if (std::memcmp(b.data(), kDumpMagic.data(), 4) != 0) {
    throw Error(ErrorCode::BadMagic, "missing SPDC magic");
  }
  DumpHeader h;
  h.format_version = get<std::uint16_t>(b.data() + 4);
  if (h.format_version != kDumpVersion) {
    throw Error(ErrorCode::UnsupportedVersion,
                fmt::format("format version {} (supported: {})", h.format_version, kDumpVersion));
  }
  if (b[6] > 1) throw Error(ErrorCode::BadHeader, fmt::format("unknown dtype code {}", b[6]));
  if (b[7] > 1) throw Error(ErrorCode::BadHeader, fmt::format("unknown tap code {}", b[7]));
  h.dtype = static_cast<DType>(b[6]);
  h.tap = static_cast<Tap>(b[7]);
  h.width = get<std::uint32_t>(b.data() + 8);
  h.layer = get<std::uint32_t>(b.data() + 12);
  h.n_tokens = get<std::uint64_t>(b.data() + 16);
  h.step = get<std::uint64_t>(b.data() + 24);
  h.width_multiplier_milli = get<std::uint32_t>(b.data() + 32);
  if (h.width == 0) throw Error(ErrorCode::BadHeader, "width is zero");
  return h;
}

DumpReader::DumpReader(std::istream& in, std::string label) : in_(in), label_(std::move(label)) {
  std::array<unsigned char, kDumpHeaderSize> bytes{};
  in_.read(reinterpret_cast<char*>(bytes.data()), kDumpHeaderSize);
  if (in_.gcount() != static_cast<std::streamsize>(kDumpHeaderSize)) {
    if (in_.gcount() >= 4 && std::memcmp(bytes.data(), kDumpMagic.data(), 4) != 0) {
      throw Error(ErrorCode::BadMagic, label_ + ": missing SPDC magic");
    }
    throw Error(ErrorCode::TruncatedPayload, label_ + ": header shorter than 64 bytes");
  }
  try {
    header_ = decode_header(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), label_ + ": " + e.detail());
  }
}

RowMatrix DumpReader::read_rows(std::uint64_t max_rows) {
  const std::uint64_t n = std::min(max_rows, rows_remaining());
  const std::uint32_t d = header_.width;
  RowMatrix rows(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  if (n > 0) {
    const std::size_t count = static_cast<std::size_t>(n) * d;
    const std::size_t bytes = count * dtype_size(header_.dtype);
    std::vector<char> buffer(bytes);
    in_.read(buffer.data(), static_cast<std::streamsize>(bytes));
    if (static_cast<std::size_t>(in_.gcount()) != bytes) {
      throw Error(ErrorCode::TruncatedPayload,
                  fmt::format("{}: payload ends inside row {} of {}", label_,
                              rows_read_ + static_cast<std::uint64_t>(in_.gcount()) /
                                               (d * dtype_size(header_.dtype)),
                              header_.n_tokens));
    }
    double* out = rows.data();
    if (header_.dtype == DType::F32) {
      for (std::size_t i = 0; i < count; ++i) {
        out[i] = static_cast<double>(get<float>(
            reinterpret_cast<const unsigned char*>(buffer.data()) + 4 * i));
      }
    } else {
      std::memcpy(out, buffer.data(), bytes);
    }
    for (std::size_t i = 0; i < count; ++i) {
      if (!std::isfinite(out[i])) {
        throw Error(ErrorCode::NonFiniteValue,
                    fmt::format("{}: non-finite value at row {}, column {}", label_,
                                rows_read_ + i / d, i % d));
      }
    }
    rows_read_ += n;
  }
  if (rows_remaining() == 0 && !tail_checked_) {
    tail_checked_ = true;
    if (in_.peek() != std::char_traits<char>::eof()) {
      throw Error(ErrorCode::TrailingBytes, label_ + ": bytes follow the declared payload");
    }
  }
  return rows;
}

ActivationBatch read_dump(std::istream& in, const std::string& label) {
  DumpReader reader(in, label);
  ActivationBatch batch;
  batch.header = reader.header();
  batch.rows = reader.read_rows(reader.header().n_tokens);
  return batch;
}

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, fmt::format("cannot open {}", path.string()));
  return in;
}

}  // namespace

ActivationBatch read_dump(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_dump(in, path.string());
}

DumpHeader read_dump_header(const std::filesystem::path& path) {
  auto in = open_input(path);
  return DumpReader(in, path.string()).header();
}

void write_dump(std::ostream& out, DumpHeader header, const Eigen::Ref<const RowMatrix>& rows) {
  header.width = static_cast<std::uint32_t>(rows.cols());
  header.n_tokens = static_cast<std::uint64_t>(rows.rows());
  header.format_version = kDumpVersion;
  const auto bytes = encode_header(header);
  out.write(reinterpret_cast<const char*>(bytes.data()), kDumpHeaderSize);
  if (header.dtype == DType::F64) {
    for (Eigen::Index r = 0; r < rows.rows(); ++r) {
      out.write(reinterpret_cast<const char*>(rows.row(r).data()),
                static_cast<std::streamsize>(rows.cols() * sizeof(double)));
    }
  } else {
    std::vector<float> row(static_cast<std::size_t>(rows.cols()));
    for (Eigen::Index r = 0; r < rows.rows(); ++r) {
      for (Eigen::Index c = 0; c < rows.cols(); ++c) row[c] = static_cast<float>(rows(r, c));
      out.write(reinterpret_cast<const char*>(row.data()),
                static_cast<std::streamsize>(row.size() * sizeof(float)));
    }
  }
  if (!out) throw Error(ErrorCode::Io, "write failed");
}

void write_dump(const std::filesystem::path& path, DumpHeader header,
                const Eigen::Ref<const RowMatrix>& rows) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, fmt::format("cannot create {}", path.string()));
  write_dump(out, header, rows);
}

Catalog scan_run(const std::filesystem::path& directory) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(directory)) {
    throw Error(ErrorCode::Io, fmt::format("{} is not a directory", directory.string()));
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(directory)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  Catalog catalog;
  std::map<GroupKey, CatalogEntry> groups;
  for (const auto& file : files) {
    DumpHeader h;
    try {
      h = read_dump_header(file);
    } catch (const Error& e) {
      catalog.rejected.push_back({file, e.code(), e.what()});
      continue;
    }
    const GroupKey key{h.layer, h.step, h.tap};
    auto [it, inserted] = groups.try_emplace(key);
    CatalogEntry& group = it->second;
    if (inserted) {
      group.key = key;
      group.width = h.width;
      group.width_multiplier_milli = h.width_multiplier_milli;
    } else if (group.width != h.width) {
      throw Error(ErrorCode::MixedWidthInGroup,
                  fmt::format("layer {} step {} {}: width {} in {} disagrees with {}", h.layer,
                              h.step, to_string(h.tap), h.width, file.string(), group.width));
    }
    group.n_tokens += h.n_tokens;
    group.files.push_back(file);
  }
  for (auto& [key, group] : groups) catalog.entries.push_back(std::move(group));
  return catalog;
}

}  // namespace ffnspec
