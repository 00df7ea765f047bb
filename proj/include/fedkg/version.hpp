#pragma once

namespace fedkg {

inline constexpr const char* kServerName = "fedkg";
inline constexpr const char* kServerVersion = "0.1.0";

// MCP protocol revision reported at initialize.
inline constexpr const char* kProtocolVersion = "2024-11-05";

} // namespace fedkg
