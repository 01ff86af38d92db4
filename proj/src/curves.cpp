#include "wgmres/curves.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

namespace wgmres::curves {

int length(const GVec& g) {
  for (Eigen::Index i = g.size(); i > 0; --i)
    if (g(i - 1) != 0.0) return static_cast<int>(i);
  return 0;
}

void validate_g(const GVec& g) {
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    if (!std::isfinite(g(i))) throw Error(ErrorKind::NonFinite, "g has non-finite entries");
    if (g(i) < 0.0) throw Error(ErrorKind::InvalidConfig, "g has a negative entry at " + std::to_string(i));
  }
}

GVec curve_to_g(const Curve& r) {
  if (r.size() < 2) throw Error(ErrorKind::InvalidConfig, "curve needs at least r_0 and r_1");
  if (!r.allFinite()) throw Error(ErrorKind::NonFinite, "curve has non-finite entries");
  const double r0 = r(0);
  if (r(r.size() - 1) < 0.0) throw Error(ErrorKind::InvalidConfig, "negative residual norm");
  GVec g(r.size() - 1);
  for (Eigen::Index i = 1; i < r.size(); ++i) {
    const double a = r(i - 1), b = r(i);
    if (b < 0.0) throw Error(ErrorKind::InvalidConfig, "negative residual norm");
    if (b > a) throw Error(ErrorKind::NotMonotone, "r_" + std::to_string(i) + " exceeds r_" + std::to_string(i - 1));
    const double d = a - b;
    g(i - 1) = d <= 1e-14 * r0 ? 0.0 : std::sqrt(d * (a + b));
  }
  return g;
}

Curve g_to_curve(const GVec& g) {
  validate_g(g);
  Curve r(g.size() + 1);
  double acc = 0.0;
  r(g.size()) = 0.0;
  for (Eigen::Index i = g.size(); i > 0; --i) {
    acc += g(i - 1) * g(i - 1);
    r(i - 1) = std::sqrt(acc);
  }
  return r;
}

Curve normalize_curve(const Curve& r) {
  if (r.size() == 0 || !(r(0) > 0.0)) throw Error(ErrorKind::ZeroInitialResidual, "r_0 must be positive");
  return r / r(0);
}

CompatibilityReport check_compatibility(const GVec& g, const Vec& b, const std::optional<Mat>& m) {
  CompatibilityReport rep;
  rep.dimension = static_cast<int>(b.size());
  rep.length = length(g);
  rep.length_ok = rep.length <= rep.dimension;
  const double bn2 = m ? (b.adjoint() * (*m) * b)(0, 0).real() : b.squaredNorm();
  const double gs = g.squaredNorm();
  rep.ratio = bn2 > 0 ? gs / bn2 : std::numeric_limits<double>::infinity();
  rep.norm_ok = std::abs(gs - bn2) <= 1e-10 * bn2;
  return rep;
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17e", x);
  return buf;
}

void write_csv(std::ostream& os, const std::vector<std::string>& labels, const std::vector<RVec>& columns) {
  if (labels.size() != columns.size()) throw Error(ErrorKind::DimensionMismatch, "labels and columns differ");
  os << "iteration";
  for (const auto& l : labels) os << ',' << l;
  os << '\n';
  Eigen::Index rows = 0;
  for (const auto& c : columns) rows = std::max(rows, c.size());
  for (Eigen::Index i = 0; i < rows; ++i) {
    os << i;
    for (const auto& c : columns) {
      os << ',';
      if (i < c.size()) os << format_double(c(i));
    }
    os << '\n';
  }
}

}  // namespace wgmres::curves
