#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace neurolock {

/// Writes to a sibling temporary file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

std::string read_file_bytes(const std::filesystem::path& path);

}  // namespace neurolock
