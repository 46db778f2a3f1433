#pragma once

namespace fluctavg {
inline constexpr const char* kToolVersion = "0.1.0";
}
