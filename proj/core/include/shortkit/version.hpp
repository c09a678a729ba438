#pragma once

namespace shortkit {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace shortkit
