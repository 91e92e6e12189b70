#pragma once

namespace gapsched {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace gapsched
