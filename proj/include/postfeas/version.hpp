#pragma once

namespace postfeas {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace postfeas
