#pragma once

namespace ctlevels {

inline constexpr const char* kVersion = "0.1.0";

} // namespace ctlevels
