#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace pf {

// Fixed-length bit vector; the visibility flag container (f_j).
class BitVec {
 public:
  BitVec() = default;
  explicit BitVec(size_t n, bool value = false)
      : size_(n), blocks_((n + 63) / 64, value ? ~0ull : 0ull) {
    trim();
  }

  size_t size() const { return size_; }

  bool get(size_t i) const { return (blocks_[i >> 6] >> (i & 63)) & 1ull; }

  void set(size_t i, bool v) {
    uint64_t mask = 1ull << (i & 63);
    if (v)
      blocks_[i >> 6] |= mask;
    else
      blocks_[i >> 6] &= ~mask;
  }

  size_t popcount() const {
    size_t c = 0;
    for (uint64_t b : blocks_) c += static_cast<size_t>(std::popcount(b));
    return c;
  }

  void or_with(const BitVec& other) {
    for (size_t i = 0; i < blocks_.size(); ++i) blocks_[i] |= other.blocks_[i];
  }

  // popcount(~this & other), the "newly covered" count of Eq-style set logic.
  size_t andnot_popcount(const BitVec& other) const {
    size_t c = 0;
    for (size_t i = 0; i < blocks_.size(); ++i)
      c += static_cast<size_t>(std::popcount(~blocks_[i] & other.blocks_[i]));
    return c;
  }

  size_t zero_count() const { return size_ - popcount(); }

  bool operator==(const BitVec& other) const {
    return size_ == other.size_ && blocks_ == other.blocks_;
  }

 private:
  void trim() {
    if (size_ & 63) blocks_.back() &= (1ull << (size_ & 63)) - 1ull;
  }

  size_t size_ = 0;
  std::vector<uint64_t> blocks_;
};

}  // namespace pf
