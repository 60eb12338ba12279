#pragma once

#include <filesystem>

#include "mbump/grid.hpp"

namespace mbump {

/// Writes `<stem>.bin` (little-endian float64, row-major) and `<stem>.json`
/// holding {dim, half_width, spacing, points_per_axis}.
void write_field(const std::filesystem::path& stem, const Field& field);

/// Reads a field written by write_field. Throws InvalidArgument on a
/// malformed sidecar or a payload of the wrong length.
Field read_field(const std::filesystem::path& stem);

}  // namespace mbump
