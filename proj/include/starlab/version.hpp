#pragma once

namespace starlab {

inline constexpr const char* k_version = "starlab 1.0.0";

} // namespace starlab
