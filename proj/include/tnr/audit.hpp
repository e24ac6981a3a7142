#pragma once

#include <nlohmann/json.hpp>

#include <ostream>
#include <string>
#include <vector>

namespace tnr {

// Append-only structured log, emitted as line-delimited JSON.
class AuditLog {
 public:
  void append(nlohmann::json record) {
    record["seq"] = records_.size();
    if (sink_) *sink_ << record.dump() << '\n';
    records_.push_back(std::move(record));
  }

  // Mirrors every subsequent record to the stream as it is appended.
  void tee(std::ostream* sink) { sink_ = sink; }

  const std::vector<nlohmann::json>& records() const { return records_; }

  std::string to_jsonl() const {
    std::string out;
    for (const auto& r : records_) out += r.dump() + "\n";
    return out;
  }

 private:
  std::vector<nlohmann::json> records_;
  std::ostream* sink_ = nullptr;
};

}  // namespace tnr
