#include "spde4/summation.hpp"

namespace spde4 {

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

void PairwiseAccumulator::add(double value) {
  block_[in_block_++] = value;
  ++count_;
  if (in_block_ == kBlock) flush_block();
}

void PairwiseAccumulator::flush_block() {
  double carry = pairwise_sum(std::span<const double>(block_, in_block_));
  in_block_ = 0;
  for (std::size_t level = 0;; ++level) {
    if (level == levels_.size()) {
      levels_.push_back(carry);
      occupied_.push_back(true);
      return;
    }
    if (!occupied_[level]) {
      levels_[level] = carry;
      occupied_[level] = true;
      return;
    }
    carry = levels_[level] + carry;
    occupied_[level] = false;
  }
}

double PairwiseAccumulator::total() const {
  double partial = pairwise_sum(std::span<const double>(block_, in_block_));
  for (std::size_t level = 0; level < levels_.size(); ++level) {
    if (occupied_[level]) partial = levels_[level] + partial;
  }
  return partial;
}

}  // namespace spde4
