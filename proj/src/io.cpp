#include "degentaxis/io.hpp"

#include <array>
#include <bit>
#include <cstdio>
#include <cstring>
#include <sstream>
#include <vector>

#include "degentaxis/error.hpp"

namespace degentaxis {
namespace {

void put_le(std::vector<char>& buf, double x) {
  const auto bits = std::bit_cast<std::uint64_t>(x);
  for (int b = 0; b < 8; ++b) buf.push_back(static_cast<char>((bits >> (8 * b)) & 0xff));
}

double get_le(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(p[b]) << (8 * b);
  return std::bit_cast<double>(bits);
}

}  // namespace

std::string snapshot_header(const Grid& g, double t) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "DEGTAX1 %d %d %d %d %.17g %.17g %.17g %.17g", g.dim, g.cells[0], g.cells[1],
                g.cells[2], g.extents[0], g.extents[1], g.extents[2], t);
  return buf;
}

void write_snapshot(const std::filesystem::path& path, const State& s) {
  validate_state(s);
  std::vector<char> buf;
  const std::string header = snapshot_header(s.u.grid, s.t) + "\n";
  buf.insert(buf.end(), header.begin(), header.end());
  buf.reserve(buf.size() + 16 * s.u.size());
  for (double x : s.u.values) put_le(buf, x);
  for (double x : s.v.values) put_le(buf, x);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidArgument("cannot open " + path.string() + " for writing");
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw InvalidArgument("short write to " + path.string());
}

State read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open snapshot " + path.string());
  std::string header;
  std::getline(in, header);
  std::istringstream hs(header);
  std::string magic;
  int dim = 0;
  std::array<int, 3> cells{};
  std::array<double, 3> extents{};
  double t = 0.0;
  hs >> magic >> dim >> cells[0] >> cells[1] >> cells[2] >> extents[0] >> extents[1] >> extents[2] >> t;
  if (magic != "DEGTAX1") throw InvalidArgument(path.string() + ": not a DEGTAX1 snapshot");
  if (!hs) throw InvalidArgument(path.string() + ": malformed snapshot header");
  if (dim < 1 || dim > 3) throw InvalidArgument(path.string() + ": bad dimension in header");
  const Grid g = make_grid(dim, std::span<const int>(cells.data(), dim), std::span<const double>(extents.data(), dim));

  const std::vector<unsigned char> payload((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (payload.size() != 16 * g.size()) {
    throw InvalidArgument(path.string() + ": payload has " + std::to_string(payload.size()) + " bytes, expected " +
                          std::to_string(16 * g.size()));
  }
  State s{Field(g), Field(g), t};
  for (std::size_t i = 0; i < g.size(); ++i) {
    s.u[i] = get_le(payload.data() + 8 * i);
    s.v[i] = get_le(payload.data() + 8 * (g.size() + i));
  }
  return s;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t x) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

NdjsonWriter::NdjsonWriter(const std::filesystem::path& path) : out_(path, std::ios::trunc) {
  if (!out_) throw InvalidArgument("cannot open " + path.string() + " for writing");
}

void NdjsonWriter::write(const nlohmann::ordered_json& j) {
  out_ << j.dump() << '\n';
  out_.flush();
}

void write_json_file(const std::filesystem::path& path, const nlohmann::ordered_json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw InvalidArgument("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
}

}  // namespace degentaxis
