#ifndef SIEVESTREAM_SAMPLE_HPP
#define SIEVESTREAM_SAMPLE_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace sievestream {

/**
 * One stream item as seen by a selector.
 *
 * There is deliberately no label field here: annotation arrives only after
 * a batch has been selected, so nothing a selector can reach carries one.
 * Labels live in LabeledSample, which never crosses a selector boundary.
 */
struct Sample {
  std::string id;
  std::uint64_t seq = 0;
  std::string group;  // duplication-group id; defaults to id on ingest

  std::optional<Eigen::VectorXd> softmax;   // probability vector, C+1 classes
  std::optional<Eigen::VectorXd> features;  // embedding / raw representation
  std::optional<double> score;              // precomputed informativeness
};

// Sample plus the evaluation-only label. Produced by the simulator and the
// record reader; the harness strips the label before anything reaches a
// selector and re-joins it for metric evaluation.
struct LabeledSample {
  Sample sample;
  std::optional<std::string> label;
};

inline std::vector<Sample> strip_labels(const std::vector<LabeledSample>& items) {
  std::vector<Sample> out;
  out.reserve(items.size());
  for (const auto& item : items) out.push_back(item.sample);
  return out;
}

// One-pass sample source. next() yields items in stream order and returns
// nullopt exactly once, at exhaustion; there is no rewind.
class SampleStream {
 public:
  virtual ~SampleStream() = default;
  virtual std::optional<Sample> next() = 0;
};

class VectorStream : public SampleStream {
 public:
  explicit VectorStream(std::vector<Sample> items) : items_(std::move(items)) {}

  std::optional<Sample> next() override {
    if (pos_ >= items_.size()) return std::nullopt;
    return items_[pos_++];
  }

 private:
  std::vector<Sample> items_;
  std::size_t pos_ = 0;
};

}  // namespace sievestream

#endif  // SIEVESTREAM_SAMPLE_HPP
