#pragma once

namespace vanbo {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace vanbo
