#pragma once

#include <atomic>
#include <memory>

#include "tutorforge/gateway/provider.hpp"

namespace tutorforge::service {

/// Retries a call once when the transport fails before any text arrived.
/// Later failures, and failures after partial output, surface unchanged.
class RetryingProvider final : public gateway::Provider {
 public:
  explicit RetryingProvider(std::shared_ptr<const gateway::Provider> inner);

  gateway::FinishReason generate(const gateway::CompletionRequest& request,
                                 const gateway::FragmentSink& emit) const override;
  [[nodiscard]] std::string name() const override { return inner_->name(); }
  [[nodiscard]] std::size_t retries() const noexcept { return retries_.load(); }

 private:
  std::shared_ptr<const gateway::Provider> inner_;
  mutable std::atomic<std::size_t> retries_{0};
};

}  // namespace tutorforge::service
