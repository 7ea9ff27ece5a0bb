#include "tutorforge/service/throttle.hpp"

#include <algorithm>
#include <cmath>

namespace tutorforge::service {

TokenBucket::TokenBucket(double capacity, double refill_per_hour, Timestamp now)
    : capacity_(capacity), per_second_(refill_per_hour / 3600.0), tokens_(capacity), updated_(now) {}

double TokenBucket::tokens(Timestamp now) const {
  // A clock that steps backwards refills nothing.
  const auto elapsed = std::max<std::int64_t>(0, (now - updated_).count());
  return std::min(capacity_, tokens_ + static_cast<double>(elapsed) * per_second_);
}

void TokenBucket::refill(Timestamp now) {
  tokens_ = tokens(now);
  if (now > updated_) updated_ = now;
}

std::int64_t TokenBucket::wait_for(double tokens) const {
  // The epsilon absorbs rounding in refills that land exactly on a token.
  return static_cast<std::int64_t>(std::ceil((1.0 - tokens) / per_second_ - 1e-9));
}

ThrottleDecision TokenBucket::check(Timestamp now) const {
  const double t = tokens(now);
  if (t >= 1.0 - 1e-9) return {};
  return {false, std::max<std::int64_t>(1, wait_for(t))};
}

ThrottleDecision TokenBucket::try_take(Timestamp now) {
  refill(now);
  if (tokens_ >= 1.0 - 1e-9) {
    tokens_ = std::max(0.0, tokens_ - 1.0);
    return {};
  }
  return {false, std::max<std::int64_t>(1, wait_for(tokens_))};
}

}  // namespace tutorforge::service
