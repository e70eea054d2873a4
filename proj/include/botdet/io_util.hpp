#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>

namespace botdet {

// Writes through a temp file in the same directory and renames into place,
// so interrupted runs never leave truncated artifacts.
void atomic_write_file(const std::filesystem::path& path,
                       const std::function<void(std::ostream&)>& writer);

std::string read_text_file(const std::filesystem::path& path);

// FNV-1a 64-bit content hash, hex-encoded (manifest input fingerprints).
std::string fnv1a64_file_hex(const std::filesystem::path& path);

}  // namespace botdet
