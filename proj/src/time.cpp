#include "ehrcheck/time.hpp"

#include <cctype>
#include <cstdio>

#include "ehrcheck/errors.hpp"

namespace ehrcheck {

namespace {

bool read_int(std::string_view s, std::size_t& pos, int digits, int& out) {
  if (pos + digits > s.size()) return false;
  int v = 0;
  for (int i = 0; i < digits; ++i) {
    const char c = s[pos + i];
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    v = v * 10 + (c - '0');
  }
  pos += digits;
  out = v;
  return true;
}

bool expect(std::string_view s, std::size_t& pos, char c) {
  if (pos < s.size() && s[pos] == c) {
    ++pos;
    return true;
  }
  return false;
}

[[noreturn]] void bad(std::string_view text) {
  throw InputError("unparseable timestamp: '" + std::string(text) + "'");
}

}  // namespace

Timestamp parse_timestamp(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);

  std::size_t pos = 0;
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0;
  if (!read_int(text, pos, 4, y) || !expect(text, pos, '-') || !read_int(text, pos, 2, mo) ||
      !expect(text, pos, '-') || !read_int(text, pos, 2, d))
    bad(text);

  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(mo)},
                                        std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) bad(text);

  long offset_seconds = 0;
  if (pos < text.size()) {
    if (text[pos] != 'T' && text[pos] != ' ') bad(text);
    ++pos;
    if (!read_int(text, pos, 2, h) || !expect(text, pos, ':') || !read_int(text, pos, 2, mi)) bad(text);
    if (expect(text, pos, ':')) {
      if (!read_int(text, pos, 2, sec)) bad(text);
      if (expect(text, pos, '.')) {
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
      }
    }
    if (h > 23 || mi > 59 || sec > 60) bad(text);
    if (pos < text.size()) {
      const char z = text[pos];
      if (z == 'Z' || z == 'z') {
        ++pos;
      } else if (z == '+' || z == '-') {
        ++pos;
        int oh = 0, om = 0;
        if (!read_int(text, pos, 2, oh)) bad(text);
        expect(text, pos, ':');
        if (!read_int(text, pos, 2, om)) bad(text);
        offset_seconds = (oh * 3600L + om * 60L) * (z == '+' ? 1 : -1);
      } else {
        bad(text);
      }
    }
    if (pos != text.size()) bad(text);
  }

  const auto days = std::chrono::sys_days{ymd};
  return Timestamp{days} + std::chrono::hours{h} + std::chrono::minutes{mi} + std::chrono::seconds{sec} -
         std::chrono::seconds{offset_seconds};
}

Timestamp start_of_day(Timestamp t) {
  return Timestamp{std::chrono::floor<std::chrono::days>(t)};
}

std::string format_date(Timestamp t) {
  const std::chrono::year_month_day ymd{std::chrono::floor<std::chrono::days>(t)};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

std::string format_time_of_day(Timestamp t) {
  const auto since_midnight = t - start_of_day(t);
  const std::chrono::hh_mm_ss hms{since_midnight};
  char buf[64];
  std::snprintf(buf, sizeof buf, "%02ld:%02ld:%02ld", static_cast<long>(hms.hours().count()),
                static_cast<long>(hms.minutes().count()), static_cast<long>(hms.seconds().count()));
  return buf;
}

std::string format_timestamp(Timestamp t) { return format_date(t) + " " + format_time_of_day(t); }

std::string format_timestamp_iso(Timestamp t) { return format_date(t) + "T" + format_time_of_day(t) + "Z"; }

}  // namespace ehrcheck
