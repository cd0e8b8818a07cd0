#pragma once

#include <string>
#include <string_view>

namespace vpm {

// Digest used for payload integrity. The algorithm name travels with every
// lockfile so a future change stays detectable.
inline constexpr std::string_view hash_algorithm = "sha256";

std::string sha256_hex(std::string_view bytes);

} // namespace vpm
