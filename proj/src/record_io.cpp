#include "sievestream/record_io.hpp"

#include <cmath>
#include <ostream>

#include <json.hpp>

#include "sievestream/errors.hpp"

namespace sievestream {

using nlohmann::json;

RecordReader::RecordReader(const std::string& path) : in_(path), path_(path) {
  if (!in_) throw InputError("cannot open record file '" + path + "'");
}

namespace {

Eigen::VectorXd vector_field(const json& j, const char* key, long line) {
  const auto& arr = j.at(key);
  if (!arr.is_array()) throw ParseError(std::string(key) + " must be an array", line);
  Eigen::VectorXd v(arr.size());
  Eigen::Index i = 0;
  for (const auto& entry : arr) {
    if (!entry.is_number()) {
      throw ParseError(std::string(key) + " entries must be numbers", line);
    }
    v[i++] = entry.get<double>();
  }
  return v;
}

}  // namespace

RecordReader::Event RecordReader::next(LabeledSample& out) {
  std::string text;
  while (std::getline(in_, text)) {
    ++line_;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;

    json j;
    try {
      j = json::parse(text);
    } catch (const json::exception& e) {
      throw ParseError(std::string("bad JSON record: ") + e.what(), line_);
    }
    if (!j.is_object()) throw ParseError("record line must be a JSON object", line_);

    if (!j.contains("id")) {
      if (j.contains("round") && j["round"].is_number_integer()) {
        last_round_marker_ = j["round"].get<int>();
        return Event::kRoundBreak;
      }
      throw ParseError("record is missing 'id'", line_);
    }

    out = LabeledSample{};
    if (!j["id"].is_string()) throw ParseError("'id' must be a string", line_);
    out.sample.id = j["id"].get<std::string>();
    if (!seen_ids_.insert(out.sample.id).second) {
      throw ParseError("duplicate id '" + out.sample.id + "'", line_);
    }

    if (!j.contains("seq") || !j["seq"].is_number_integer()) {
      throw ParseError("record is missing integer 'seq'", line_);
    }
    const auto seq_signed = j["seq"].get<std::int64_t>();
    if (seq_signed < 0) throw ParseError("'seq' must be non-negative", line_);
    out.sample.seq = static_cast<std::uint64_t>(seq_signed);
    if (seen_any_seq_ && out.sample.seq <= last_seq_) {
      throw ParseError("'seq' must be strictly increasing", line_);
    }
    seen_any_seq_ = true;
    last_seq_ = out.sample.seq;

    if (j.contains("group")) {
      if (!j["group"].is_string()) throw ParseError("'group' must be a string", line_);
      out.sample.group = j["group"].get<std::string>();
    } else {
      out.sample.group = out.sample.id;
    }

    if (j.contains("softmax")) {
      Eigen::VectorXd p = vector_field(j, "softmax", line_);
      double sum = 0.0;
      for (Eigen::Index i = 0; i < p.size(); ++i) {
        if (!(p[i] >= 0.0) || !std::isfinite(p[i])) {
          throw ParseError("softmax entries must be non-negative finite", line_);
        }
        sum += p[i];
      }
      if (std::abs(sum - 1.0) > 1e-6) {
        throw ParseError("softmax must sum to 1 (got " + std::to_string(sum) + ")",
                         line_);
      }
      out.sample.softmax = std::move(p);
    }
    if (j.contains("features")) {
      Eigen::VectorXd f = vector_field(j, "features", line_);
      if (!f.allFinite()) throw ParseError("features must be finite", line_);
      out.sample.features = std::move(f);
    }
    if (j.contains("score")) {
      if (!j["score"].is_number()) throw ParseError("'score' must be a number", line_);
      const double s = j["score"].get<double>();
      if (!std::isfinite(s) || s < 0.0) {
        throw ParseError("'score' must be a non-negative finite number", line_);
      }
      out.sample.score = s;
    }
    if (j.contains("label")) {
      if (!j["label"].is_string()) throw ParseError("'label' must be a string", line_);
      out.label = j["label"].get<std::string>();
    }
    if (!out.sample.softmax && !out.sample.features && !out.sample.score) {
      throw ParseError("record carries none of softmax/features/score", line_);
    }
    return Event::kSample;
  }
  return Event::kEnd;
}

std::vector<std::vector<LabeledSample>> read_rounds(const std::string& path) {
  RecordReader reader(path);
  std::vector<std::vector<LabeledSample>> rounds;
  std::vector<LabeledSample> current;
  bool saw_marker = false;

  LabeledSample item;
  while (true) {
    const auto event = reader.next(item);
    if (event == RecordReader::Event::kEnd) break;
    if (event == RecordReader::Event::kRoundBreak) {
      // The first marker opens round 0; later markers close the round
      // accumulated so far.
      if (saw_marker || !current.empty()) {
        rounds.push_back(std::move(current));
        current.clear();
      }
      saw_marker = true;
      continue;
    }
    current.push_back(item);
  }
  // A marker-less file is one round; an empty file is zero rounds.
  if (saw_marker || !current.empty()) rounds.push_back(std::move(current));
  return rounds;
}

void write_record(std::ostream& out, const LabeledSample& item) {
  json j;
  j["id"] = item.sample.id;
  j["seq"] = item.sample.seq;
  if (!item.sample.group.empty() && item.sample.group != item.sample.id) {
    j["group"] = item.sample.group;
  }
  if (item.sample.softmax) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < item.sample.softmax->size(); ++i) {
      arr.push_back((*item.sample.softmax)[i]);
    }
    j["softmax"] = std::move(arr);
  }
  if (item.sample.features) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < item.sample.features->size(); ++i) {
      arr.push_back((*item.sample.features)[i]);
    }
    j["features"] = std::move(arr);
  }
  if (item.sample.score) j["score"] = *item.sample.score;
  if (item.label) j["label"] = *item.label;
  out << j.dump() << '\n';
}

void write_round_marker(std::ostream& out, int round) {
  out << "{\"round\":" << round << "}" << '\n';
}

void write_records(std::ostream& out, std::span<const LabeledSample> items) {
  for (const LabeledSample& item : items) write_record(out, item);
}

}  // namespace sievestream
