#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace spde4 {

/// Pairwise (cascade) summation of a contiguous range.
double pairwise_sum(std::span<const double> values);

/// Streaming cascade summation. Terms are grouped in blocks and the block
/// sums are merged like a binary counter, so the result equals a pairwise
/// reduction over the insertion order and needs only O(log n) storage.
class PairwiseAccumulator {
 public:
  void add(double value);
  double total() const;
  std::size_t count() const { return count_; }

 private:
  static constexpr std::size_t kBlock = 64;
  void flush_block();

  double block_[kBlock] = {};
  std::size_t in_block_ = 0;
  std::size_t count_ = 0;
  // levels_[i] holds the sum of 2^i blocks, or nothing.
  std::vector<double> levels_;
  std::vector<bool> occupied_;
};

}  // namespace spde4
