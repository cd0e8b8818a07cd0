#pragma once

#include <string_view>

namespace vpm {

inline constexpr std::string_view tool_name = "vpm";
inline constexpr std::string_view tool_version = "1.0.0";

} // namespace vpm
