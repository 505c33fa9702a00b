#ifndef SIEVESTREAM_RECORD_IO_HPP
#define SIEVESTREAM_RECORD_IO_HPP

#include <fstream>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "sievestream/sample.hpp"

namespace sievestream {

/**
 * Streaming reader for newline-delimited JSON record files.
 *
 * One sample per line with keys {id, seq, group?, softmax?, features?,
 * score?, label?}; unknown keys are ignored. A line of the form
 * {"round": n} marks a round boundary in concatenated multi-round files.
 * Reads line by line with bounded memory, validates as it goes (strictly
 * increasing seq, no duplicate ids, softmax sums to one, score >= 0) and
 * reports failures as ParseError with the 1-based line number.
 */
class RecordReader {
 public:
  explicit RecordReader(const std::string& path);

  enum class Event { kSample, kRoundBreak, kEnd };

  // Advances the reader. Fills `out` only for kSample; for kRoundBreak the
  // marker's round number is available through last_round_marker().
  Event next(LabeledSample& out);

  int last_round_marker() const { return last_round_marker_; }
  long line() const { return line_; }

 private:
  std::ifstream in_;
  std::string path_;
  long line_ = 0;
  int last_round_marker_ = -1;
  bool seen_any_seq_ = false;
  std::uint64_t last_seq_ = 0;
  std::unordered_set<std::string> seen_ids_;
};

// Reads a whole file, splitting at round markers. A file with no markers
// yields a single round.
std::vector<std::vector<LabeledSample>> read_rounds(const std::string& path);

void write_record(std::ostream& out, const LabeledSample& item);
void write_round_marker(std::ostream& out, int round);
void write_records(std::ostream& out, std::span<const LabeledSample> items);

}  // namespace sievestream

#endif  // SIEVESTREAM_RECORD_IO_HPP
