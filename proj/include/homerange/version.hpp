#pragma once

namespace homerange {
inline constexpr const char* kVersion = "0.1.0";
}
