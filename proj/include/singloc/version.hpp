#pragma once

namespace singloc {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace singloc
