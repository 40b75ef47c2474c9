#include "advpad/classifier/oracle.hpp"

#include <cmath>

#include "advpad/error.hpp"

namespace advpad::classifier {

std::vector<Prediction> Oracle::predict_batch(std::span<const Bytes> inputs, Want want) const {
  std::vector<Prediction> out;
  out.reserve(inputs.size());
  for (const Bytes& in : inputs) out.push_back(predict(in, want));
  return out;
}

Prediction predict(const Oracle& oracle, ByteView bytes) {
  const OracleCapabilities caps = oracle.capabilities();
  return oracle.predict(bytes, Want{caps.has_distribution, caps.has_embedding});
}

int predict_label(const Oracle& oracle, ByteView bytes) { return oracle.predict(bytes, Want{}).label; }

void require_capabilities(const OracleCapabilities& caps, Want want) {
  if (want.distribution && !caps.has_distribution) {
    fail(ErrorCode::CapabilityUnsupported, "oracle does not expose output distributions");
  }
  if (want.embedding && !caps.has_embedding) {
    fail(ErrorCode::CapabilityUnsupported, "oracle does not expose embeddings");
  }
}

int argmax(std::span<const double> values) {
  int best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  }
  return best;
}

bool is_valid_prediction(const Prediction& p, double tol) {
  if (!p.distribution) return p.label >= 0;
  const auto& dist = *p.distribution;
  if (dist.empty()) return false;
  double sum = 0.0;
  for (double v : dist) {
    if (!(v >= 0.0)) return false;
    sum += v;
  }
  return std::abs(sum - 1.0) <= tol && p.label == argmax(dist);
}

}  // namespace advpad::classifier
