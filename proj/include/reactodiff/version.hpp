#pragma once

namespace reactodiff {

inline constexpr const char* kVersion = "0.1.0";

} // namespace reactodiff
