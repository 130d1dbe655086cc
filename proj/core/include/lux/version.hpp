#pragma once

namespace lux {

inline constexpr const char* kToolName = "lux";
inline constexpr const char* kVersion = "0.1.0";

}  // namespace lux
