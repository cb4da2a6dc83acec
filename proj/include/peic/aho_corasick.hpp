#pragma once

// Dense-table Aho-Corasick automaton over raw bytes. Used as the host-side
// exact matcher: the unfiltered baseline path and the traffic generator's
// clean-background check.

#include <algorithm>
#include <array>
#include <cstdint>
#include <deque>
#include <stdexcept>
#include <vector>

#include "peic/bytes.hpp"

namespace peic {

class AhoCorasick {
 public:
  struct Hit {
    std::size_t offset;
    std::size_t length;
    std::size_t pattern;  // index passed to add order

    friend bool operator==(const Hit&, const Hit&) = default;
  };

  AhoCorasick() { new_state(); }

  /// Returns the pattern's index. Identical patterns share one index; the
  /// first registration wins.
  std::size_t add(ByteView pattern) {
    if (compiled_) throw std::logic_error("AhoCorasick::add after compile");
    std::int32_t s = 0;
    for (auto b : pattern) {
      if (next_[s][b] < 0) {
        const auto t = new_state();
        next_[s][b] = t;
      }
      s = next_[s][b];
    }
    if (terminal_[s] < 0) {
      terminal_[s] = static_cast<std::int32_t>(lengths_.size());
      lengths_.push_back(pattern.size());
    }
    compiled_ = false;
    return static_cast<std::size_t>(terminal_[s]);
  }

  std::size_t pattern_count() const noexcept { return lengths_.size(); }

  void compile() {
    std::vector<std::int32_t> fail(next_.size(), 0);
    std::deque<std::int32_t> queue;
    for (std::size_t b = 0; b < 256; ++b) {
      auto& t = next_[0][b];
      if (t < 0) t = 0;
      else queue.push_back(t);
    }
    while (!queue.empty()) {
      const auto s = queue.front();
      queue.pop_front();
      const auto f = fail[s];
      dict_[s] = terminal_[f] >= 0 ? f : dict_[f];
      for (std::size_t b = 0; b < 256; ++b) {
        auto& t = next_[s][b];
        if (t < 0) {
          t = next_[f][b];
        } else {
          fail[t] = next_[f][b];
          queue.push_back(t);
        }
      }
    }
    compiled_ = true;
  }

  bool compiled() const noexcept { return compiled_ || lengths_.empty(); }

  /// All occurrences sorted by (offset, length). compile() must have run.
  std::vector<Hit> find_all(ByteView text) const {
    std::vector<Hit> hits;
    if (lengths_.empty()) return hits;
    std::int32_t s = 0;
    for (std::size_t j = 0; j < text.size(); ++j) {
      s = next_[s][text[j]];
      for (auto t = terminal_[s] >= 0 ? s : dict_[s]; t > 0; t = dict_[t]) {
        const auto id = static_cast<std::size_t>(terminal_[t]);
        hits.push_back({j + 1 - lengths_[id], lengths_[id], id});
      }
    }
    std::sort(hits.begin(), hits.end(),
              [](const Hit& a, const Hit& b) { return a.offset != b.offset ? a.offset < b.offset : a.length < b.length; });
    return hits;
  }

  bool contains_any(ByteView text) const noexcept {
    if (lengths_.empty()) return false;
    std::int32_t s = 0;
    for (auto b : text) {
      s = next_[s][b];
      if (terminal_[s] >= 0 || dict_[s] > 0) return true;
    }
    return false;
  }

 private:
  std::int32_t new_state() {
    std::array<std::int32_t, 256> row;
    row.fill(-1);
    next_.push_back(row);
    terminal_.push_back(-1);
    dict_.push_back(0);
    return static_cast<std::int32_t>(next_.size() - 1);
  }

  std::vector<std::array<std::int32_t, 256>> next_;
  std::vector<std::int32_t> terminal_;  // pattern index ending here, or -1
  std::vector<std::int32_t> dict_;      // nearest terminal proper suffix; 0 = none
  std::vector<std::size_t> lengths_;
  bool compiled_ = false;
};

}  // namespace peic
