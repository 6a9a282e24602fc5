#pragma once

#include <filesystem>
#include <string_view>

#include "lrsha/bytes.hpp"

namespace lrsha {

// Throws Errc::io_error.
Bytes read_file(const std::filesystem::path& path);

// Writes `data` to a sibling temp file, fsyncs it, renames it over `path`
// and fsyncs the directory. Readers see either the old or the new contents.
void atomic_write_file(const std::filesystem::path& path, ByteView data,
                       std::filesystem::perms mode = std::filesystem::perms::owner_read |
                                                     std::filesystem::perms::owner_write);

// Appends and fsyncs. Creates the file with owner-only permissions if needed.
void append_file(const std::filesystem::path& path, ByteView data);

// Test hook: exits the process immediately when LRSHA_CRASH_AT names `point`.
void crash_point(std::string_view point);

}  // namespace lrsha
