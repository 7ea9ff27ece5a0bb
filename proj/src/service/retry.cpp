#include "tutorforge/service/retry.hpp"

namespace tutorforge::service {

RetryingProvider::RetryingProvider(std::shared_ptr<const gateway::Provider> inner)
    : inner_(std::move(inner)) {}

gateway::FinishReason RetryingProvider::generate(const gateway::CompletionRequest& request,
                                                 const gateway::FragmentSink& emit) const {
  bool emitted = false;
  const gateway::FragmentSink tracking = [&](std::string_view fragment) {
    emitted = true;
    return emit(fragment);
  };
  try {
    return inner_->generate(request, tracking);
  } catch (const gateway::ProviderError& e) {
    if (e.code() != ErrorCode::ProviderUnreachable || emitted) throw;
  }
  ++retries_;
  return inner_->generate(request, emit);
}

}  // namespace tutorforge::service
