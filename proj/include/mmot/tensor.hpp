#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace mmot {

using Index = std::size_t;
using IndexTuple = std::vector<Index>;

// Largest number of entries materialized as a dense m-way array.
inline constexpr std::uint64_t kDenseCap = 1'000'000;

// Row-major shape of an m-way array (axis 0 varies slowest).
class TensorShape {
 public:
  TensorShape() = default;
  explicit TensorShape(std::vector<Index> sizes);

  std::size_t arity() const { return sizes_.size(); }
  const std::vector<Index>& sizes() const { return sizes_; }
  Index size(std::size_t axis) const { return sizes_[axis]; }
  std::uint64_t total() const { return total_; }
  bool dense_ok() const { return total_ <= kDenseCap; }

  // True when every axis has the same length.
  bool homogeneous() const;

  std::uint64_t flat(std::span<const Index> idx) const;
  void unflat(std::uint64_t flat, std::span<Index> out) const;
  IndexTuple unflat(std::uint64_t flat) const;

  // Flat index of (i_1, ..., i_{m-1}, i_0) given the flat index of
  // (i_0, ..., i_{m-1}). Homogeneous shapes only.
  std::uint64_t shifted(std::uint64_t flat) const;

  bool operator==(const TensorShape& other) const { return sizes_ == other.sizes_; }

 private:
  std::vector<Index> sizes_;
  std::vector<std::uint64_t> strides_;
  std::uint64_t total_ = 0;
};

// Odometer increment; returns false after the last tuple.
bool next_tuple(std::span<Index> idx, std::span<const Index> sizes);

}  // namespace mmot
