#include "mmot/simplex.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mmot/error.hpp"

namespace mmot {

namespace {

constexpr double kPivotTol = 1e-11;
constexpr double kRatioTieTol = 1e-13;
constexpr std::size_t kRefactorEvery = 64;
constexpr std::size_t kIterationCap = 5'000'000;

class TransportSimplex {
 public:
  TransportSimplex(const TensorShape& shape, std::span<const double> cost,
                   const std::vector<std::vector<double>>& weights)
      : shape_(shape), cost_(cost), num_cols_(shape.total()) {
    const std::size_t m = shape.arity();
    row_offset_.resize(m);
    std::size_t rows = 0;
    for (std::size_t k = 0; k < m; ++k) {
      row_offset_[k] = rows;
      rows += (k == 0) ? shape.size(0) : shape.size(k) - 1;
    }
    num_rows_ = rows;
    b_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(rows));
    for (std::size_t k = 0; k < m; ++k)
      for (Index i = 0; i < shape.size(k); ++i) {
        const auto r = row_of(k, i);
        if (r >= 0) b_[r] = weights[k][i];
      }
    double scale = 1.0;
    for (double c : cost) scale = std::max(scale, std::abs(c));
    cost_tol_ = 1e-11 * scale;
    col_rows_.resize(num_cols_ * m);
    IndexTuple idx(m, 0);
    for (std::uint64_t f = 0; f < num_cols_; ++f) {
      shape.unflat(f, idx);
      for (std::size_t k = 0; k < m; ++k) col_rows_[f * m + k] = row_of(k, idx[k]);
    }
  }

  TransportLpSolution run() {
    const auto r = static_cast<Eigen::Index>(num_rows_);
    basis_.resize(num_rows_);
    is_basic_.assign(num_cols_ + num_rows_, false);
    for (std::size_t q = 0; q < num_rows_; ++q) {
      basis_[q] = num_cols_ + q;
      is_basic_[num_cols_ + q] = true;
    }
    binv_ = Eigen::MatrixXd::Identity(r, r);
    xb_ = b_;

    phase_ = 1;
    iterate();
    double infeasibility = 0.0;
    for (std::size_t q = 0; q < num_rows_; ++q)
      if (is_artificial(basis_[q])) infeasibility += xb_[static_cast<Eigen::Index>(q)];
    if (infeasibility > 1e-9)
      throw Error(ErrorCode::InfeasibleMarginals, "marginals admit no coupling (phase-1 residual " +
                                                      std::to_string(infeasibility) + ")");
    drive_out_artificials();
    phase_ = 2;
    iterate();

    TransportLpSolution sol;
    sol.iterations = iterations_;
    sol.x.assign(num_cols_, 0.0);
    for (std::size_t q = 0; q < num_rows_; ++q)
      if (!is_artificial(basis_[q])) sol.x[basis_[q]] = std::max(0.0, xb_[static_cast<Eigen::Index>(q)]);
    for (std::uint64_t f = 0; f < num_cols_; ++f) sol.objective += cost_[f] * sol.x[f];
    const Eigen::VectorXd y = duals();
    const std::size_t m = shape_.arity();
    sol.potentials.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
      sol.potentials[k].assign(shape_.size(k), 0.0);
      for (Index i = 0; i < shape_.size(k); ++i) {
        const auto row = row_of(k, i);
        if (row >= 0) sol.potentials[k][i] = y[row];
      }
    }
    return sol;
  }

 private:
  Eigen::Index row_of(std::size_t axis, Index i) const {
    if (axis > 0 && i + 1 == shape_.size(axis)) return -1;
    return static_cast<Eigen::Index>(row_offset_[axis] + i);
  }

  bool is_artificial(std::size_t var) const { return var >= num_cols_; }

  double var_cost(std::size_t var) const {
    if (phase_ == 1) return is_artificial(var) ? 1.0 : 0.0;
    return is_artificial(var) ? 0.0 : cost_[var];
  }

  template <class Fn>
  void for_rows(std::size_t var, Fn&& fn) const {
    if (is_artificial(var)) {
      fn(static_cast<Eigen::Index>(var - num_cols_));
      return;
    }
    const std::size_t m = shape_.arity();
    for (std::size_t k = 0; k < m; ++k) {
      const auto row = col_rows_[var * m + k];
      if (row >= 0) fn(row);
    }
  }

  Eigen::VectorXd duals() const {
    Eigen::VectorXd cb(static_cast<Eigen::Index>(num_rows_));
    for (std::size_t q = 0; q < num_rows_; ++q) cb[static_cast<Eigen::Index>(q)] = var_cost(basis_[q]);
    return binv_.transpose() * cb;
  }

  Eigen::VectorXd column_image(std::size_t var) const {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(num_rows_));
    for_rows(var, [&](Eigen::Index row) { w += binv_.col(row); });
    return w;
  }

  void pivot(std::size_t p, std::size_t entering, const Eigen::VectorXd& w) {
    const auto pr = static_cast<Eigen::Index>(p);
    const double theta = xb_[pr] / w[pr];
    xb_ -= theta * w;
    xb_[pr] = theta;
    binv_.row(pr) /= w[pr];
    for (Eigen::Index i = 0; i < binv_.rows(); ++i)
      if (i != pr && w[i] != 0.0) binv_.row(i) -= w[i] * binv_.row(pr);
    is_basic_[basis_[p]] = false;
    basis_[p] = entering;
    is_basic_[entering] = true;
    for (Eigen::Index i = 0; i < xb_.size(); ++i)
      if (std::abs(xb_[i]) < 1e-15) xb_[i] = 0.0;
    if (++since_refactor_ >= kRefactorEvery) refactor();
  }

  void refactor() {
    since_refactor_ = 0;
    const auto r = static_cast<Eigen::Index>(num_rows_);
    Eigen::MatrixXd basis_matrix = Eigen::MatrixXd::Zero(r, r);
    for (std::size_t q = 0; q < num_rows_; ++q)
      for_rows(basis_[q], [&](Eigen::Index row) { basis_matrix(row, static_cast<Eigen::Index>(q)) = 1.0; });
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(basis_matrix);
    binv_ = lu.inverse();
    xb_ = binv_ * b_;
    for (Eigen::Index i = 0; i < xb_.size(); ++i)
      if (std::abs(xb_[i]) < 1e-15) xb_[i] = 0.0;
  }

  void iterate() {
    for (;;) {
      if (++iterations_ > kIterationCap) throw Error(ErrorCode::CapExceeded, "simplex iteration cap reached");
      const Eigen::VectorXd y = duals();
      std::size_t entering = num_cols_ + num_rows_;
      const std::size_t last = (phase_ == 1) ? num_cols_ + num_rows_ : num_cols_;
      for (std::size_t j = 0; j < last; ++j) {
        if (is_basic_[j]) continue;
        double reduced = var_cost(j);
        for_rows(j, [&](Eigen::Index row) { reduced -= y[row]; });
        if (reduced < -cost_tol_) {
          entering = j;
          break;
        }
      }
      if (entering == num_cols_ + num_rows_) return;
      const Eigen::VectorXd w = column_image(entering);
      std::size_t leave = num_rows_;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t q = 0; q < num_rows_; ++q) {
        const double wq = w[static_cast<Eigen::Index>(q)];
        if (wq <= kPivotTol) continue;
        const double ratio = xb_[static_cast<Eigen::Index>(q)] / wq;
        if (leave == num_rows_ || ratio < best - kRatioTieTol ||
            (ratio <= best + kRatioTieTol && basis_[q] < basis_[leave])) {
          best = std::min(best, ratio);
          leave = q;
        }
      }
      if (leave == num_rows_) throw Error(ErrorCode::InvalidArgument, "transport LP reported unbounded");
      pivot(leave, entering, w);
    }
  }

  void drive_out_artificials() {
    for (std::size_t q = 0; q < num_rows_; ++q) {
      if (!is_artificial(basis_[q])) continue;
      for (std::size_t j = 0; j < num_cols_; ++j) {
        if (is_basic_[j]) continue;
        const Eigen::VectorXd w = column_image(j);
        if (std::abs(w[static_cast<Eigen::Index>(q)]) > 1e-9) {
          pivot(q, j, w);
          break;
        }
      }
    }
  }

  const TensorShape& shape_;
  std::span<const double> cost_;
  std::uint64_t num_cols_;
  std::size_t num_rows_ = 0;
  std::vector<std::size_t> row_offset_;
  std::vector<Eigen::Index> col_rows_;
  Eigen::VectorXd b_;
  double cost_tol_ = 1e-11;

  int phase_ = 1;
  std::vector<std::size_t> basis_;
  std::vector<bool> is_basic_;
  Eigen::MatrixXd binv_;
  Eigen::VectorXd xb_;
  std::size_t iterations_ = 0;
  std::size_t since_refactor_ = 0;
};

}  // namespace

TransportLpSolution solve_transport_lp(const TensorShape& shape, std::span<const double> cost,
                                       const std::vector<std::vector<double>>& weights) {
  if (cost.size() != shape.total()) throw Error(ErrorCode::DimensionMismatch, "cost length does not match shape");
  if (weights.size() != shape.arity()) throw Error(ErrorCode::DimensionMismatch, "one weight vector per axis");
  double total0 = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (weights[k].size() != shape.size(k))
      throw Error(ErrorCode::DimensionMismatch, "weights of axis " + std::to_string(k) + " do not match shape");
    double total = 0.0;
    for (double w : weights[k]) {
      if (w < 0.0) throw Error(ErrorCode::InfeasibleMarginals, "negative marginal weight");
      total += w;
    }
    if (k == 0) total0 = total;
    if (std::abs(total - total0) > 1e-12)
      throw Error(ErrorCode::InfeasibleMarginals, "marginal masses differ between axes");
  }
  TransportSimplex lp(shape, cost, weights);
  return lp.run();
}

}  // namespace mmot
