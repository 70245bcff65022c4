#pragma once

namespace calikit {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace calikit
