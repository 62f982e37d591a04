#pragma once

#include <stdexcept>
#include <string>

namespace looptau {

// Inclusive index range for the independent variables. Anything indexed
// outside the window is treated as zero, which keeps every computation finite.
struct Window {
  int lo;
  int hi;

  Window(int lo_, int hi_) : lo(lo_), hi(hi_) {
    if (lo > hi) throw std::invalid_argument("window bounds out of order");
  }

  bool contains(int k) const { return lo <= k && k <= hi; }
  int width() const { return hi - lo + 1; }

  std::string str() const { return "[" + std::to_string(lo) + "," + std::to_string(hi) + "]"; }
};

}  // namespace looptau
