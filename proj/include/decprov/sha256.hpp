#pragma once

#include <string>

namespace decprov {

// Lowercase hex SHA-256 digest of the input bytes.
std::string sha256_hex(const std::string& data);

inline const char* kZeroHash =
    "0000000000000000000000000000000000000000000000000000000000000000";

}  // namespace decprov
