#pragma once

namespace tomsim {

inline constexpr const char* kEngineVersion = "0.1.0";

}  // namespace tomsim
