#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace ehrcheck {

// All timestamps are UTC with one-second resolution.
using Timestamp = std::chrono::sys_seconds;

// Accepts "YYYY-MM-DD", "YYYY-MM-DD[T ]HH:MM[:SS[.fff]]" with an optional
// trailing "Z" or "+HH:MM"/"-HH:MM" offset. Zone-free input is taken as UTC.
// Throws InputError on anything else.
Timestamp parse_timestamp(std::string_view text);

// "YYYY-MM-DD HH:MM:SS"
std::string format_timestamp(Timestamp t);
// "YYYY-MM-DDTHH:MM:SSZ"
std::string format_timestamp_iso(Timestamp t);
std::string format_date(Timestamp t);
std::string format_time_of_day(Timestamp t);

Timestamp start_of_day(Timestamp t);

}  // namespace ehrcheck
