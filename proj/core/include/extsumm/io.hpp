#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace extsumm {

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);

// Splits on '\n', dropping empty lines.
std::vector<std::string> split_lines(const std::string& content);

// FNV-1a over the file bytes; used for run-manifest checksums and the
// end-to-end determinism checks. Not a cryptographic hash.
std::uint64_t file_checksum(const std::filesystem::path& path);

// Hex rendering of a checksum, zero padded to 16 digits.
std::string checksum_hex(std::uint64_t h);

}  // namespace extsumm
