#pragma once

#include <cstdint>
#include <string>

namespace decprov {

// UTC instant, milliseconds since the Unix epoch.
using Instant = std::int64_t;

// RFC 3339 with millisecond resolution, e.g. "2025-06-15T21:00:00.000Z".
std::string format_instant(Instant ms);
Instant parse_instant(const std::string& s);  // throws Error(ParseError)

}  // namespace decprov
