#pragma once

namespace mvbsc {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace mvbsc
