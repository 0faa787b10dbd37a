#include "mmot/qp.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace mmot {

namespace {

struct ActiveConstraint {
  bool equality;
  Eigen::Index id;
  double multiplier;
};

}  // namespace

std::optional<Eigen::VectorXd> min_norm_point(const Eigen::MatrixXd& eq_rows, const Eigen::VectorXd& eq_rhs,
                                              const Eigen::MatrixXd& in_rows, const Eigen::VectorXd& in_rhs,
                                              double tol) {
  const Eigen::Index nv = eq_rows.rows() > 0 ? eq_rows.cols() : in_rows.cols();
  constexpr double inf = std::numeric_limits<double>::infinity();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(nv);
  std::vector<ActiveConstraint> active;

  auto normal = [&](const ActiveConstraint& c) -> Eigen::VectorXd {
    return c.equality ? Eigen::VectorXd(eq_rows.row(c.id).transpose()) : Eigen::VectorXd(in_rows.row(c.id).transpose());
  };
  // z: component of `a` orthogonal to the active normals (primal step);
  // r: coordinates of the remainder in the active normals (multiplier step).
  auto project = [&](const Eigen::VectorXd& a, Eigen::VectorXd& z, Eigen::VectorXd& r) {
    if (active.empty()) {
      z = a;
      r.resize(0);
      return;
    }
    Eigen::MatrixXd n(nv, static_cast<Eigen::Index>(active.size()));
    for (std::size_t k = 0; k < active.size(); ++k) n.col(static_cast<Eigen::Index>(k)) = normal(active[k]);
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(n);
    r = cod.solve(a);
    z = a - n * r;
  };

  Eigen::VectorXd z, r;
  for (Eigen::Index e = 0; e < eq_rows.rows(); ++e) {
    const Eigen::VectorXd a = eq_rows.row(e).transpose();
    const double s = a.dot(x) - eq_rhs[e];
    project(a, z, r);
    const double za = z.dot(a);
    if (za <= 1e-12 * a.squaredNorm()) {
      if (std::abs(s) <= 1e-9 * (1.0 + std::abs(eq_rhs[e]))) continue;  // dependent and consistent
      return std::nullopt;
    }
    const double t = -s / za;
    x += t * z;
    for (std::size_t k = 0; k < active.size(); ++k) active[k].multiplier -= t * r[static_cast<Eigen::Index>(k)];
    active.push_back({true, e, t});
  }

  const std::size_t cap = 20 * static_cast<std::size_t>(in_rows.rows() + eq_rows.rows() + nv) + 100;
  for (std::size_t iter = 0; iter < cap; ++iter) {
    Eigen::Index p = -1;
    double worst = 0.0;
    for (Eigen::Index i = 0; i < in_rows.rows(); ++i) {
      const double s = in_rows.row(i).dot(x) - in_rhs[i];
      if (s < -tol * (1.0 + std::abs(in_rhs[i])) && s < worst) {
        worst = s;
        p = i;
      }
    }
    if (p < 0) break;
    const Eigen::VectorXd a = in_rows.row(p).transpose();
    double sp = worst;
    double added = 0.0;
    for (std::size_t inner = 0;; ++inner) {
      if (inner > cap) return std::nullopt;
      project(a, z, r);
      const double za = z.dot(a);
      double t1 = inf;
      std::size_t block = active.size();
      for (std::size_t k = 0; k < active.size(); ++k) {
        const double rk = r[static_cast<Eigen::Index>(k)];
        if (active[k].equality || rk <= 1e-12) continue;
        const double ratio = active[k].multiplier / rk;
        if (ratio < t1) {
          t1 = ratio;
          block = k;
        }
      }
      const double t2 = (za > 1e-12 * a.squaredNorm()) ? -sp / za : inf;
      const double t = std::min(t1, t2);
      if (t == inf) return std::nullopt;
      for (std::size_t k = 0; k < active.size(); ++k) active[k].multiplier -= t * r[static_cast<Eigen::Index>(k)];
      added += t;
      if (t2 == inf) {
        active.erase(active.begin() + static_cast<std::ptrdiff_t>(block));
        continue;
      }
      x += t * z;
      if (t2 <= t1) {
        active.push_back({false, p, added});
        break;
      }
      active.erase(active.begin() + static_cast<std::ptrdiff_t>(block));
      sp = a.dot(x) - in_rhs[p];
    }
  }

  for (Eigen::Index e = 0; e < eq_rows.rows(); ++e)
    if (std::abs(eq_rows.row(e).dot(x) - eq_rhs[e]) > 1e-9 * (1.0 + std::abs(eq_rhs[e]))) return std::nullopt;
  for (Eigen::Index i = 0; i < in_rows.rows(); ++i)
    if (in_rows.row(i).dot(x) - in_rhs[i] < -1e-9 * (1.0 + std::abs(in_rhs[i]))) return std::nullopt;
  return x;
}

}  // namespace mmot
