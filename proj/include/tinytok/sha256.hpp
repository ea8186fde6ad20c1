#pragma once

#include <string>
#include <string_view>

namespace tinytok {

// Lowercase hex SHA-256 digest of a byte string.
std::string sha256_hex(std::string_view data);

// Streaming digest of a file's raw bytes.  Throws UserError if the file
// cannot be opened.
std::string sha256_file_hex(const std::string& path);

}  // namespace tinytok
