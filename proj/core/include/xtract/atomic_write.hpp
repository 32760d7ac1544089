#pragma once

#include <filesystem>
#include <string_view>

namespace xtract {

/// Writes to a sibling temp file, then renames over `path`, keeping an
/// existing file's permissions. Throws Error(io_error).
void write_file_atomically(const std::filesystem::path& path, std::string_view content);

}  // namespace xtract
