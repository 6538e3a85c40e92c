#pragma once

namespace slicer {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace slicer
