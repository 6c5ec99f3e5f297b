#pragma once

namespace tfe {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace tfe
