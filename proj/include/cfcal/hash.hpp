#pragma once

#include <cstdint>
#include <string>

namespace cfcal {

/// FNV-1a 64-bit over a byte string.
std::uint64_t fnv1a64(const std::string& bytes);

/// Hash of a file's contents, formatted as "fnv1a64:<16 hex digits>".
/// Used in run manifests and calibration results to pin inputs.
std::string file_hash(const std::string& path);

}  // namespace cfcal
