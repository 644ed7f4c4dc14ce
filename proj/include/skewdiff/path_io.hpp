#pragma once

#include <filesystem>
#include <iosfwd>

#include "skewdiff/path.hpp"

namespace skewdiff {

inline constexpr std::uint32_t kPathDumpVersion = 1;

/// Binary dump: "SKWD", version u32, n_steps u32, frame u8, then
/// n_steps + 1 little-endian f64 values.
void write_path_dump(const Path& path, std::ostream& out);
void write_path_dump(const Path& path, const std::filesystem::path& file);

/// Restores frame and values; grid.T is not stored and is set to 1.
Path read_path_dump(std::istream& in);
Path read_path_dump(const std::filesystem::path& file);

}  // namespace skewdiff
