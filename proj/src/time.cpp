#include "decprov/time.hpp"

#include <cinttypes>
#include <cstdio>
#include <ctime>

#include "decprov/errors.hpp"

namespace decprov {

std::string format_instant(Instant ms) {
  std::time_t secs = static_cast<std::time_t>(ms >= 0 ? ms / 1000 : (ms - 999) / 1000);
  int frac = static_cast<int>(ms - static_cast<Instant>(secs) * 1000);
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, frac);
  return buf;
}

Instant parse_instant(const std::string& s) {
  int y, mo, d, h, mi, sec, frac = 0;
  char tail = 0;
  int n = std::sscanf(s.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d.%3d%c", &y, &mo, &d, &h, &mi, &sec,
                      &frac, &tail);
  if (n == 8 && tail == 'Z') {
    // ok, fractional form
  } else {
    frac = 0;
    n = std::sscanf(s.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%c", &y, &mo, &d, &h, &mi, &sec, &tail);
    if (n != 7 || tail != 'Z') throw Error(Errc::ParseError, "bad RFC 3339 instant: " + s);
  }
  std::tm tm{};
  tm.tm_year = y - 1900;
  tm.tm_mon = mo - 1;
  tm.tm_mday = d;
  tm.tm_hour = h;
  tm.tm_min = mi;
  tm.tm_sec = sec;
  std::time_t secs = timegm(&tm);
  if (secs == static_cast<std::time_t>(-1))
    throw Error(Errc::ParseError, "instant out of range: " + s);
  return static_cast<Instant>(secs) * 1000 + frac;
}

}  // namespace decprov
