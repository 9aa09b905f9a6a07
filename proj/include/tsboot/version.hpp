#pragma once

namespace tsboot {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace tsboot
