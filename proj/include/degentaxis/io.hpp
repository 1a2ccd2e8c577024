#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>

#include <json.hpp>

#include "degentaxis/model.hpp"

namespace degentaxis {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kFormatVersion = 1;

/// "DEGTAX1 dim nx ny nz Lx Ly Lz t" (no newline), numbers in %.17g.
std::string snapshot_header(const Grid& g, double t);

/// Header line, then u and v as little-endian IEEE doubles in cell order.
void write_snapshot(const std::filesystem::path& path, const State& s);
/// Throws InvalidArgument on a bad magic, header or payload size.
State read_snapshot(const std::filesystem::path& path);

/// 64-bit FNV-1a, used for the config hash in manifests.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t x);

/// Appends one JSON object per line and flushes after each, so a crashed
/// run leaves a readable prefix.
class NdjsonWriter {
 public:
  explicit NdjsonWriter(const std::filesystem::path& path);
  void write(const nlohmann::ordered_json& j);

 private:
  std::ofstream out_;
};

/// Writes `j` pretty-printed with a trailing newline.
void write_json_file(const std::filesystem::path& path, const nlohmann::ordered_json& j);

}  // namespace degentaxis
