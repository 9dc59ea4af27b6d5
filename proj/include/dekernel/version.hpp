#pragma once

namespace dekernel {
inline constexpr const char* kVersion = "0.1.0";
}
