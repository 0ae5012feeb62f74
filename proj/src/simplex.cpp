#include "twostage/simplex.hpp"

#include <Eigen/Dense>

namespace twostage::detail {

namespace {

constexpr double kNegligible = 1e-13;

double clean(double v) { return (v < kNegligible && v > -kNegligible) ? 0.0 : v; }

}  // namespace

bool refresh_tableau(Tableau<double>& t, const Tableau<double>& original, const std::vector<double>& cost,
                     std::vector<double>& obj, double& obj_value) {
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const auto m = static_cast<Eigen::Index>(t.rows_);
  const auto cols = static_cast<Eigen::Index>(t.cols_);
  if (m == 0) return false;
  Eigen::MatrixXd basis(m, m);
  for (Eigen::Index r = 0; r < m; ++r) {
    for (Eigen::Index k = 0; k < m; ++k) basis(r, k) = original.at(r, t.basis_[k]);
  }
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(basis);
  if (!(lu.rcond() > 1e-13)) return false;
  const Eigen::Map<const RowMajor> a(original.a_.data(), m, cols);
  const Eigen::Map<const Eigen::VectorXd> b(original.rhs_.data(), m);
  const RowMajor body = lu.solve(a);
  const Eigen::VectorXd rhs = lu.solve(b);

  obj_value = 0.0;
  for (std::size_t c = 0; c < t.cols_; ++c) obj[c] = cost[c];
  for (Eigen::Index r = 0; r < m; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) t.at(r, c) = clean(body(r, c));
    t.at(r, t.basis_[r]) = 1.0;
    double v = clean(rhs(r));
    if (v < 0.0 && v > -SimplexTolerance<double>::eps) v = 0.0;
    t.rhs_[r] = v;
    const double cb = cost[t.basis_[r]];
    if (cb == 0.0) continue;
    for (Eigen::Index c = 0; c < cols; ++c) obj[c] -= cb * t.at(r, c);
    obj_value += cb * t.rhs_[r];
  }
  for (Eigen::Index r = 0; r < m; ++r) obj[t.basis_[r]] = 0.0;
  for (auto& v : obj) v = clean(v);
  return true;
}

}  // namespace twostage::detail
