#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace apex {

// 64-bit FNV-1a, stable across platforms; used for provenance stamps.
std::uint64_t fnv1a64(std::string_view data);
std::string hex_digest(std::string_view data);

}  // namespace apex
