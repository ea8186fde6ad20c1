#pragma once

namespace tinytok {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kToolName = "tinytok";

}  // namespace tinytok
