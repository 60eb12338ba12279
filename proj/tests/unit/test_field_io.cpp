#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "mbump/error.hpp"
#include "mbump/field_io.hpp"

using namespace mbump;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "mbump_field_io";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(FieldIo, RoundTripIsBitExact) {
  const Grid g(2, 1.0, 0.25);
  const Field u = sample(g, [](const Point3& x) { return std::sin(3.0 * x[0]) + 1e-300 * x[1]; });
  const fs::path stem = scratch("roundtrip");
  write_field(stem, u);
  const Field back = read_field(stem);
  ASSERT_TRUE(back.grid() == g);
  for (std::size_t k = 0; k < g.size(); ++k) EXPECT_EQ(back[k], u[k]);
  EXPECT_EQ(fs::file_size(fs::path(stem.string() + ".bin")), g.size() * sizeof(double));
}

TEST(FieldIo, RejectsTruncatedPayload) {
  const Grid g(1, 1.0, 0.25);
  const fs::path stem = scratch("truncated");
  write_field(stem, Field(g, 1.0));
  fs::resize_file(fs::path(stem.string() + ".bin"), 8);
  EXPECT_THROW(read_field(stem), InvalidArgument);
}

TEST(FieldIo, RejectsMalformedSidecar) {
  const Grid g(1, 1.0, 0.25);
  const fs::path stem = scratch("sidecar");
  write_field(stem, Field(g, 1.0));
  std::ofstream(stem.string() + ".json") << "{\"dim\": 7}";
  EXPECT_THROW(read_field(stem), InvalidArgument);
}
