#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace styleforge {

/// 64-bit FNV-1a, rendered as 16 lowercase hex digits. Used to fingerprint
/// configurations, not for security.
std::string digest_hex(std::string_view text);

}  // namespace styleforge
