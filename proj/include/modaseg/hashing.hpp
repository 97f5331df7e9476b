#pragma once

#include <cstdint>
#include <string>

namespace modaseg {

/// SHA-256 hex digest of a byte string.
std::string sha256_hex(const std::string& bytes);

/// SHA-256 hex digest of a file's contents.
std::string sha256_file(const std::string& path);

}  // namespace modaseg
