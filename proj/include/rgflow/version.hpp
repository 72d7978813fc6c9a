#pragma once

namespace rgflow {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace rgflow
