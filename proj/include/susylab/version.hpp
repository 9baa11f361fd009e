#pragma once

namespace susylab {

inline constexpr const char* kVersion = "susylab 0.1.0";

}
