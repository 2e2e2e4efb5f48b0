#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qcl {

using Bytes = std::vector<uint8_t>;
using ByteSpan = std::span<const uint8_t>;

std::string to_hex(ByteSpan data);

// Throws ParseError on odd length or non-hex characters.
Bytes from_hex(std::string_view hex);

}  // namespace qcl
