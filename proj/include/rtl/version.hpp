#pragma once

namespace rtl {

inline constexpr const char* kToolName = "rtlsat";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace rtl
