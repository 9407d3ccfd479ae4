#pragma once

namespace gdce {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace gdce
