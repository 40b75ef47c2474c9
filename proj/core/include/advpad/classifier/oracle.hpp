#pragma once

#include <optional>
#include <span>
#include <vector>

#include "advpad/bytes.hpp"

namespace advpad::classifier {

// Black-box oracles expose labels only; white-box rewards additionally need
// the output distribution and a representation vector.
struct OracleCapabilities {
  bool has_labels = true;
  bool has_distribution = false;
  bool has_embedding = false;

  bool supports_whitebox() const noexcept { return has_distribution && has_embedding; }
};

struct Want {
  bool distribution = false;
  bool embedding = false;
};

struct Prediction {
  int label = 0;
  std::optional<std::vector<double>> distribution;
  std::optional<std::vector<double>> embedding;

  bool operator==(const Prediction&) const = default;
};

// A classifier queried on preprocessed byte sequences. Implementations must
// be deterministic and safe to call concurrently.
class Oracle {
 public:
  virtual ~Oracle() = default;

  virtual OracleCapabilities capabilities() const = 0;
  // Throws EmptyInput for an empty sequence and CapabilityUnsupported when
  // `want` asks for something the oracle does not expose.
  virtual Prediction predict(ByteView bytes, Want want) const = 0;
  virtual std::vector<Prediction> predict_batch(std::span<const Bytes> inputs, Want want) const;
  // Number of leading bytes the model reads; 0 when unbounded.
  virtual std::size_t input_length() const { return 0; }
};

// Query with everything the oracle can provide.
Prediction predict(const Oracle& oracle, ByteView bytes);
int predict_label(const Oracle& oracle, ByteView bytes);

// Throws CapabilityUnsupported if `want` exceeds `caps`.
void require_capabilities(const OracleCapabilities& caps, Want want);

// Distribution entries non-negative and summing to 1 within `tol`, and the
// label is its argmax (first index on ties).
bool is_valid_prediction(const Prediction& p, double tol = 1e-6);

int argmax(std::span<const double> values);

}  // namespace advpad::classifier
