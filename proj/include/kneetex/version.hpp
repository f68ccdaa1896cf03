#pragma once

namespace kneetex {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace kneetex
