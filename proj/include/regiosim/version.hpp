#pragma once

namespace regiosim {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace regiosim
