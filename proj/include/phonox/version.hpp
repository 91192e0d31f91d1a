#pragma once

namespace phonox {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace phonox
