#pragma once

namespace bjj {
inline constexpr const char* kVersion = "bjjqsl 0.1.0";
}
