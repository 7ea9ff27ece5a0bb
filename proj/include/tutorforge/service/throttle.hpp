#pragma once

#include <cstdint>

#include "tutorforge/core/error.hpp"
#include "tutorforge/core/time.hpp"

namespace tutorforge::service {

struct ThrottleDecision {
  bool allowed = true;
  std::int64_t retry_after_seconds = 0;  // whole seconds until a token is back
};

/// Token bucket holding at most `capacity` queries and refilling
/// continuously at `refill_per_hour`.
class TokenBucket {
 public:
  TokenBucket(double capacity, double refill_per_hour, Timestamp now);

  /// Takes one token when available.
  ThrottleDecision try_take(Timestamp now);
  /// Reports without taking.
  [[nodiscard]] ThrottleDecision check(Timestamp now) const;
  [[nodiscard]] double tokens(Timestamp now) const;
  [[nodiscard]] double capacity() const noexcept { return capacity_; }

 private:
  void refill(Timestamp now);
  [[nodiscard]] std::int64_t wait_for(double tokens) const;

  double capacity_;
  double per_second_;
  double tokens_;
  Timestamp updated_;
};

/// Error(Throttled) carrying the wait.
class ThrottledError : public Error {
 public:
  explicit ThrottledError(std::int64_t retry_after_seconds)
      : Error(ErrorCode::Throttled,
              "query limit reached; retry after " + std::to_string(retry_after_seconds) + " s"),
        retry_after_(retry_after_seconds) {}
  [[nodiscard]] std::int64_t retry_after_seconds() const noexcept { return retry_after_; }

 private:
  std::int64_t retry_after_;
};

}  // namespace tutorforge::service
