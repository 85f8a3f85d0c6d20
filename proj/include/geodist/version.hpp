#pragma once

namespace geodist {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace geodist
