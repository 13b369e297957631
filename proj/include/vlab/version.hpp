#pragma once

namespace vlab {
inline constexpr const char* kVersion = "vlasovlab 0.1.0";
}
