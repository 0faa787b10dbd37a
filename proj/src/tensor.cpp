#include "mmot/tensor.hpp"

#include <limits>

#include "mmot/error.hpp"

namespace mmot {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonNormalized: return "NonNormalized";
    case ErrorCode::NegativeWeight: return "NegativeWeight";
    case ErrorCode::EmptySupport: return "EmptySupport";
    case ErrorCode::AxisOutOfRange: return "AxisOutOfRange";
    case ErrorCode::HeterogeneousSupports: return "HeterogeneousSupports";
    case ErrorCode::MapOutOfRange: return "MapOutOfRange";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::BaseMismatch: return "BaseMismatch";
    case ErrorCode::NonUniformWeights: return "NonUniformWeights";
    case ErrorCode::MarginalMismatch: return "MarginalMismatch";
    case ErrorCode::InfeasibleMarginals: return "InfeasibleMarginals";
    case ErrorCode::SizeCapExceeded: return "SizeCapExceeded";
    case ErrorCode::NonSquare: return "NonSquare";
    case ErrorCode::NotExactSolve: return "NotExactSolve";
    case ErrorCode::NotQuadraticCost: return "NotQuadraticCost";
    case ErrorCode::CapExceeded: return "CapExceeded";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::DegenerateField: return "DegenerateField";
    case ErrorCode::EmptySample: return "EmptySample";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::NonSquareGrid: return "NonSquareGrid";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InputError: return "InputError";
  }
  return "Unknown";
}

TensorShape::TensorShape(std::vector<Index> sizes) : sizes_(std::move(sizes)) {
  if (sizes_.empty()) throw Error(ErrorCode::InvalidArgument, "tensor arity must be >= 1");
  strides_.assign(sizes_.size(), 1);
  total_ = 1;
  for (std::size_t k = sizes_.size(); k-- > 0;) {
    if (sizes_[k] == 0) throw Error(ErrorCode::EmptySupport, "axis " + std::to_string(k) + " is empty");
    strides_[k] = total_;
    if (total_ > std::numeric_limits<std::uint64_t>::max() / 2 / sizes_[k])
      throw Error(ErrorCode::SizeCapExceeded, "index space overflows 64 bits");
    total_ *= sizes_[k];
  }
}

bool TensorShape::homogeneous() const {
  for (Index s : sizes_)
    if (s != sizes_.front()) return false;
  return true;
}

std::uint64_t TensorShape::flat(std::span<const Index> idx) const {
  std::uint64_t f = 0;
  for (std::size_t k = 0; k < sizes_.size(); ++k) f += strides_[k] * idx[k];
  return f;
}

void TensorShape::unflat(std::uint64_t flat, std::span<Index> out) const {
  for (std::size_t k = 0; k < sizes_.size(); ++k) {
    out[k] = static_cast<Index>(flat / strides_[k]);
    flat %= strides_[k];
  }
}

IndexTuple TensorShape::unflat(std::uint64_t flat) const {
  IndexTuple idx(sizes_.size());
  unflat(flat, idx);
  return idx;
}

std::uint64_t TensorShape::shifted(std::uint64_t flat) const {
  // (i_0, rest) -> (rest, i_0): drop the leading digit, append it last.
  const std::uint64_t lead = flat / strides_[0];
  const std::uint64_t rest = flat % strides_[0];
  return rest * sizes_.back() + lead;
}

bool next_tuple(std::span<Index> idx, std::span<const Index> sizes) {
  for (std::size_t k = idx.size(); k-- > 0;) {
    if (++idx[k] < sizes[k]) return true;
    idx[k] = 0;
  }
  return false;
}

}  // namespace mmot
