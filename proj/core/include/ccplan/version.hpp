#pragma once

namespace ccplan {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace ccplan
