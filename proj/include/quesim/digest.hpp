#pragma once

#include <cstdint>
#include <string>

namespace quesim {

/// FNV-1a 64-bit over a byte string.
std::uint64_t fnv1a64(const std::string& bytes);

/// Content digest of a file as a 16-char hex string. Throws DataError when
/// the file cannot be read.
std::string file_digest(const std::string& path);

}  // namespace quesim
