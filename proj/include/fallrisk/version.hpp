#pragma once

namespace fallrisk {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace fallrisk
