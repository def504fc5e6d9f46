#pragma once

namespace factlab {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace factlab
