#pragma once

#include <chrono>
#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace didlkit {

// UTC instant at whole-second precision, rendered as "YYYY-MM-DDThh:mm:ssZ".
class Timestamp {
 public:
  using Seconds = std::chrono::sys_seconds;

  constexpr Timestamp() = default;
  constexpr explicit Timestamp(Seconds at) : at_(at) {}

  static Timestamp from_unix(std::int64_t seconds) {
    return Timestamp(Seconds(std::chrono::seconds(seconds)));
  }
  static Timestamp now();

  // RFC 3339 date-time. Fractional seconds are truncated, numeric offsets are
  // folded into UTC. Returns nullopt for anything else.
  static std::optional<Timestamp> parse(std::string_view text);
  // OAI-PMH day granularity "YYYY-MM-DD" (start of day).
  static std::optional<Timestamp> parse_date(std::string_view text);

  std::string to_string() const;
  std::int64_t unix_seconds() const { return at_.time_since_epoch().count(); }
  Seconds time_point() const { return at_; }

  friend constexpr auto operator<=>(const Timestamp&, const Timestamp&) = default;

 private:
  Seconds at_{};
};

}  // namespace didlkit
