#pragma once

namespace dii {

inline constexpr const char* version = "1.0.0";

}  // namespace dii
