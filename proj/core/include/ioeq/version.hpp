#pragma once

namespace ioeq {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace ioeq
