#pragma once

namespace shelab {

inline constexpr const char* version = "0.1.0";

}  // namespace shelab
