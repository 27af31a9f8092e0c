#pragma once

#include <functional>
#include <vector>

#include "infrew/error.hpp"
#include "infrew/trs.hpp"

namespace infrew::detail {

/// Concatenation of batches 0, 1, 2, ... of redexes, produced on demand and
/// in order.  The batch function may keep state between calls.
class BatchStream {
public:
  using Batch = std::function<std::vector<Redex>(std::size_t)>;

  /// Consecutive empty batches tolerated before giving up.
  static constexpr std::size_t kIdleCap = std::size_t{1} << 14;

  explicit BatchStream(Batch b) : batch_(std::move(b)) {}

  const Redex& at(std::size_t i) {
    std::size_t idle = 0;
    while (out_.size() <= i) {
      auto before = out_.size();
      pull();
      if (out_.size() != before) idle = 0;
      else if (++idle > kIdleCap)
        throw Error("budget-exceeded", "no further steps after " + std::to_string(kIdleCap) + " empty batches");
    }
    return out_[i];
  }

  /// Output index at which batch k starts.
  std::size_t start_of(std::size_t k) {
    while (starts_.size() <= k) pull();
    return starts_[k];
  }

private:
  void pull() {
    starts_.push_back(out_.size());
    auto b = batch_(starts_.size() - 1);
    out_.insert(out_.end(), b.begin(), b.end());
  }

  Batch batch_;
  std::vector<Redex> out_;
  std::vector<std::size_t> starts_;
};

} // namespace infrew::detail
