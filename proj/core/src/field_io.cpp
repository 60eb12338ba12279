#include "mbump/field_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "mbump/error.hpp"

namespace mbump {

namespace {

std::filesystem::path with_suffix(const std::filesystem::path& stem, const char* ext) {
  std::filesystem::path p = stem;
  p += ext;
  return p;
}

std::uint64_t to_little(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) return v;
  std::uint64_t r = 0;
  for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xffu) << (8 * (7 - i));
  return r;
}

}  // namespace

void write_field(const std::filesystem::path& stem, const Field& field) {
  if (stem.has_parent_path()) std::filesystem::create_directories(stem.parent_path());
  const Grid& g = field.grid();
  nlohmann::json meta{{"dim", g.dim()},
                      {"half_width", g.half_width()},
                      {"spacing", g.spacing()},
                      {"points_per_axis", g.points_per_axis()}};
  std::ofstream js(with_suffix(stem, ".json"));
  if (!js) throw InvalidArgument("cannot open " + with_suffix(stem, ".json").string());
  js << meta.dump(2) << '\n';

  std::ofstream bin(with_suffix(stem, ".bin"), std::ios::binary);
  if (!bin) throw InvalidArgument("cannot open " + with_suffix(stem, ".bin").string());
  for (double v : field.values()) {
    const std::uint64_t bits = to_little(std::bit_cast<std::uint64_t>(v));
    char buf[8];
    std::memcpy(buf, &bits, 8);
    bin.write(buf, 8);
  }
}

Field read_field(const std::filesystem::path& stem) {
  std::ifstream js(with_suffix(stem, ".json"));
  if (!js) throw InvalidArgument("cannot open " + with_suffix(stem, ".json").string());
  nlohmann::json meta;
  try {
    js >> meta;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed field sidecar: ") + e.what());
  }
  int dim = 0;
  int points = 0;
  double half_width = 0.0;
  double spacing = 0.0;
  try {
    dim = meta.at("dim").get<int>();
    half_width = meta.at("half_width").get<double>();
    spacing = meta.at("spacing").get<double>();
    points = meta.at("points_per_axis").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed field sidecar: ") + e.what());
  }
  const Grid g(dim, half_width, spacing);
  if (g.points_per_axis() != points)
    throw InvalidArgument("field sidecar points_per_axis inconsistent with spacing");

  std::ifstream bin(with_suffix(stem, ".bin"), std::ios::binary);
  if (!bin) throw InvalidArgument("cannot open " + with_suffix(stem, ".bin").string());
  std::vector<double> values(g.size());
  for (double& v : values) {
    char buf[8];
    if (!bin.read(buf, 8)) throw InvalidArgument("field payload shorter than grid");
    std::uint64_t bits;
    std::memcpy(&bits, buf, 8);
    v = std::bit_cast<double>(to_little(bits));
  }
  if (bin.peek() != std::char_traits<char>::eof()) throw InvalidArgument("field payload longer than grid");
  return Field(g, std::move(values));
}

}  // namespace mbump
