#pragma once

namespace praim {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace praim
