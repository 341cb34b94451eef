#pragma once

namespace ahmm {

inline constexpr const char* VERSION = "0.1.0";

}  // namespace ahmm
