#include "wgmres/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace wgmres::analysis {

bool BoundReport::all() const {
  return std::all_of(satisfied.begin(), satisfied.end(), [](bool s) { return s; });
}

bool LookaheadReport::all() const {
  return bounds.all() && std::all_of(interlacing.begin(), interlacing.end(), [](bool s) { return s; });
}

bool NecessaryConditionsReport::all() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.informational || c.pass; });
}

const Check& NecessaryConditionsReport::get(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return c;
  throw Error(ErrorKind::InvalidConfig, "no check named " + name);
}

bool SandwichReport::all() const {
  for (const auto& row : satisfied)
    for (bool s : row)
      if (!s) return false;
  return normalized.all();
}

namespace {

Mat gram(const Mat& bmat, const krylov::WeightMatrix& m) {
  return m.is_identity() ? Mat(bmat.adjoint() * bmat) : Mat(bmat.adjoint() * m.matrix() * bmat);
}

Mat with_rhs(const Mat& w_k, const Vec& b) {
  if (w_k.rows() != b.size()) throw Error(ErrorKind::DimensionMismatch, "basis and b differ in rows");
  Mat bm(b.size(), w_k.cols() + 1);
  bm.col(0) = b;
  bm.rightCols(w_k.cols()) = w_k;
  return bm;
}

// z = (B* M B)^{-1} e_1
Vec first_column_of_inverse(const Mat& bm, const krylov::WeightMatrix& m) {
  Mat g = gram(bm, m);
  Eigen::LDLT<Mat> f(g);
  const RVec d = f.vectorD().real();
  const double eps = std::numeric_limits<double>::epsilon();
  if (f.info() != Eigen::Success || !(d.minCoeff() > 4.0 * eps * double(d.size()) * d.maxCoeff()))
    throw Error(ErrorKind::RankDeficientBasis, "B* M B is not positive definite");
  Vec e1 = Vec::Zero(g.rows());
  e1(0) = 1.0;
  Vec z = f.solve(e1);
  if (!(z(0).real() > 0) || !z.allFinite()) throw Error(ErrorKind::RankDeficientBasis, "B is rank deficient");
  return z;
}

}  // namespace

double ipsen_inverse_entry(const Mat& w_k, const Vec& b, const krylov::WeightMatrix& m) {
  return first_column_of_inverse(with_rhs(w_k, b), m)(0).real();
}

double ipsen_residual_norm(const Mat& w_k, const Vec& b, const krylov::WeightMatrix& m) {
  Mat bm = with_rhs(w_k, b);
  Vec y = bm * first_column_of_inverse(bm, m);
  return 1.0 / m.norm(y);
}

Vec ipsen_residual(const Mat& w_k, const Vec& b, const krylov::WeightMatrix& m) {
  Mat bm = with_rhs(w_k, b);
  Vec z = first_column_of_inverse(bm, m);
  return bm * z / z(0).real();
}

double norm_ratio(const Mat& w_k, const Vec& b, const krylov::WeightMatrix& m, const krylov::WeightMatrix& n,
                  Ratio which) {
  const auto id = krylov::WeightMatrix::identity(static_cast<int>(b.size()));
  Mat bm = with_rhs(w_k, b);
  Vec yi = bm * first_column_of_inverse(bm, id);
  Vec ym = bm * first_column_of_inverse(bm, m);
  // r = y_I / ||y_I||^2 and r~ = y_M / ||y_M||_M^2.
  const double yi_i = yi.norm(), ym_m = m.norm(ym);
  switch (which) {
    case Ratio::TildeI_TildeM: return ym.norm() / ym_m;
    case Ratio::RM_RI: return m.norm(yi) / yi_i;
    case Ratio::RI_TildeM: return ym_m / yi_i;
    case Ratio::TildeI_RI: return ym.norm() * yi_i / (ym_m * ym_m);
    case Ratio::TildeN_RN: return n.norm(ym) * yi_i * yi_i / (ym_m * ym_m * n.norm(yi));
  }
  return 0.0;
}

LookaheadReport lookahead_bounds(const forge::LinkMatrix& t, const krylov::Trace& ti, const krylov::Trace& tm) {
  const int m = t.m;
  if (ti.iterations != m || tm.iterations != m)
    throw Error(ErrorKind::LinkMismatch, "traces do not share the link's length");
  RVec g = ti.g_realized, gt = tm.g_realized;
  Vec tg = t.t.topLeftCorner(m, m) * gt.cast<cplx>();
  if ((g.cast<cplx>() - tg).norm() > 1e-8 * g.norm()) throw Error(ErrorKind::LinkMismatch, "g differs from T g~");

  const double smax = t.sigma(0), smin = t.sigma(t.sigma.size() - 1);
  LookaheadReport rep;
  auto& b = rep.bounds;
  b.lower.resize(m);
  b.upper.resize(m);
  b.observed.resize(m);
  b.slack.resize(m);
  for (int k = 0; k < m; ++k) {
    RVec s = num::singular_values(t.t.block(k, k, m - k, m - k));
    const double lo = s(s.size() - 1), hi = s(0);
    const double obs = g.tail(m - k).norm();
    const double ref = gt.tail(m - k).norm();
    b.lower(k) = lo * ref;
    b.upper(k) = hi * ref;
    b.observed(k) = obs;
    const double tol = 1e-10 * obs;
    b.slack(k) = std::min(obs - b.lower(k), b.upper(k) - obs);
    b.satisfied.push_back(b.lower(k) - tol <= obs && obs <= b.upper(k) + tol);
    rep.interlacing.push_back(lo >= smin - 1e-12 * smax && hi <= smax + 1e-12 * smax);
  }
  return rep;
}

NecessaryConditionsReport necessary_conditions(const forge::LinkMatrix& t, const RVec& g, const RVec& gt,
                                               const RVec& sigma, double tol) {
  const Eigen::Index n = t.t.rows();
  const int m = t.m;
  if (sigma.size() != n || g.size() < m || gt.size() < m || m < 1)
    throw Error(ErrorKind::DimensionMismatch, "necessary_conditions dimensions");
  NecessaryConditionsReport rep;

  // Eigenvalues read off the diagonal of the triangular form.
  Vec diag = t.t.diagonal();
  std::vector<Eigen::Index> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return std::abs(diag(a)) > std::abs(diag(b)); });
  rep.xi.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) rep.xi(i) = diag(idx[i]);

  const double ratio = g(m - 1) / gt(m - 1);
  {
    const double r = std::abs(t.t(m - 1, m - 1) - ratio) / std::abs(ratio);
    rep.checks.push_back({"trailing_entry", r <= tol, r});
  }
  {
    bool lower_zero = true;
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = j + 1; i < n; ++i)
        if (std::abs(t.t(i, j)) > tol * t.sigma(0)) lower_zero = false;
    const double r = num::eigen_pairing_error(diag, num::general_eig(t.t));
    rep.checks.push_back({"diagonal_eigenvalues", lower_zero && r <= tol, r});
  }
  {
    double lx = 0.0, ls = 0.0, worst = -std::numeric_limits<double>::infinity(), last = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
      lx += std::log(std::abs(rep.xi(k)));
      ls += std::log(sigma(k));
      worst = std::max(worst, lx - ls);
      last = lx - ls;
    }
    const double r = std::abs(std::expm1(last));
    rep.checks.push_back({"weyl_multiplicative", worst <= tol && r <= tol, std::max(r, worst)});
  }
  {
    double sx = 0.0, ss = 0.0, worst = -std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < n; ++k) {
      sx += std::abs(rep.xi(k));
      ss += sigma(k);
      worst = std::max(worst, (sx - ss) / ss);
    }
    rep.checks.push_back({"weyl_additive", worst <= tol, worst});
  }
  {
    const double s1 = sigma(0), sn = sigma(n - 1);
    const double over = std::max(sn - ratio, ratio - s1) / s1;
    rep.checks.push_back({"eigenvalue_window", over <= tol, over});
    const double stated = gt(m - 1) / g(m - 1);
    const double over_stated = std::max(sn - stated, stated - s1) / s1;
    rep.checks.push_back({"eigenvalue_window_stated", over_stated <= tol, over_stated, true});
    auto is_eig = [&](double v) {
      for (Eigen::Index i = 0; i < n; ++i)
        if (std::abs(rep.xi(i) - v) <= tol * std::max(1.0, std::abs(v))) return true;
      return false;
    };
    rep.stated_ratio_is_eigenvalue = is_eig(stated);
    rep.corrected_ratio_is_eigenvalue = is_eig(ratio);
  }
  {
    const double f = t.t.squaredNorm(), s = sigma.squaredNorm();
    const double r = std::abs(f - s) / s;
    rep.checks.push_back({"frobenius", r <= tol, r});
  }
  return rep;
}

double curve_deviation(const curves::Curve& got, const curves::Curve& ref) {
  const Eigen::Index len = std::max(got.size(), ref.size());
  const double scale = ref.size() ? ref(0) : 1.0;
  double worst = 0.0;
  for (Eigen::Index k = 0; k < len; ++k) {
    const double r = k < ref.size() ? ref(k) : 0.0;
    if (k >= got.size()) {
      if (r > 0) worst = std::max(worst, 1.0);
      continue;
    }
    const double d = std::abs(got(k) - r);
    worst = std::max(worst, r > 0 ? d / r : d / scale);
  }
  return worst;
}

CharacterizationResult verify_weight_characterization(const Mat& a, const Vec& b, const krylov::WeightMatrix& m,
                                                      const curves::GVec& gt) {
  const Eigen::Index n = a.rows();
  const auto id = krylov::WeightMatrix::identity(static_cast<int>(n));
  CharacterizationResult res;
  auto ti = krylov::mgmres(a, b, id);
  auto tm = krylov::mgmres(a, b, m);
  if (!ti.breakdown) throw Error(ErrorKind::BreakdownMismatch, "I-GMRES did not terminate");
  if (gt.size() != n) {
    res.failure = "g_tilde dimension";
    return res;
  }
  if (curves::length(gt) != ti.iterations) {
    res.failure = "length of g_tilde differs from the breakdown index";
    return res;
  }
  res.curve_error = curve_deviation(tm.residual_norms, curves::g_to_curve(gt));
  Mat w = krylov::complete_basis(ti.basis_w, id);
  Mat wt = krylov::complete_basis(tm.basis_w, m);
  res.t = w.adjoint() * wt;
  Mat wtt = w * res.t;
  res.unitary_residual = (wtt.adjoint() * m.matrix() * wtt - Mat::Identity(n, n)).norm() / std::sqrt(double(n));
  res.rhs_residual = (b - wtt * gt.cast<cplx>()).norm() / b.norm();
  if (res.curve_error > 1e-7) res.failure = "M-GMRES does not realize g_tilde";
  else if (res.unitary_residual > 1e-8) res.failure = "M^{-1} = W T (W T)* fails";
  else if (res.rhs_residual > 1e-8) res.failure = "b = W T g_tilde fails";
  res.ok = res.failure.empty();
  return res;
}

CharacterizationResult verify_preconditioner_characterization(const Mat& a_hat, const Vec& b, const Mat& h,
                                                              const curves::GVec& g_left) {
  return verify_weight_characterization(a_hat, b, krylov::WeightMatrix(Mat(h.adjoint() * h)), g_left);
}

forge::LinkMatrix extract_link(const krylov::Trace& ti, const krylov::Trace& tm, const krylov::WeightMatrix& m) {
  const Eigen::Index n = ti.basis_w.rows();
  if (tm.basis_w.rows() != n || ti.iterations != tm.iterations)
    throw Error(ErrorKind::BasisMismatch, "traces come from different systems");
  const int k = ti.iterations;
  Mat w = krylov::complete_basis(ti.basis_w, krylov::WeightMatrix::identity(static_cast<int>(n)));
  Mat wt = krylov::complete_basis(tm.basis_w, m);
  Mat t = w.adjoint() * wt;
  const double scale = t.norm();
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = j + 1; i < n; ++i) {
      if (j < k && std::abs(t(i, j)) > 1e-9 * scale)
        throw Error(ErrorKind::BasisMismatch, "link matrix is not block triangular");
      if (j < k) t(i, j) = 0.0;
    }
  return forge::make_link(t, k);
}

SandwichReport sandwich(const krylov::Trace& ti, const krylov::Trace& tm, const krylov::WeightMatrix& m) {
  if (ti.residuals.empty() || tm.residuals.empty())
    throw Error(ErrorKind::InvalidConfig, "sandwich needs retained residual vectors");
  const double mu_min = m.eigenvalues()(0), mu_max = m.eigenvalues()(m.eigenvalues().size() - 1);
  const double kappa = mu_max / mu_min;
  const int steps = static_cast<int>(std::min(ti.residual_norms.size(), tm.residual_norms.size()));
  const double b2 = ti.residual_norms(0) * ti.residual_norms(0);
  // Explicit residual vectors carry absolute rounding errors of order eps ||b||.
  const double floor = 1e-13 * mu_max * b2;
  SandwichReport rep;
  rep.worst = RVec(steps);
  auto& nb = rep.normalized;
  nb.lower.resize(steps);
  nb.upper.resize(steps);
  nb.observed.resize(steps);
  nb.slack.resize(steps);
  const double r0 = ti.residual_norms(0), rt0 = tm.residual_norms(0);
  for (int k = 0; k < steps; ++k) {
    const double ri = ti.residual_norms(k), rtm = tm.residual_norms(k);
    const double rti = tm.residuals[k].norm(), rm = m.norm(ti.residuals[k]);
    const double chain[5] = {mu_min * ri * ri, mu_min * rti * rti, rtm * rtm, rm * rm, mu_max * ri * ri};
    std::vector<bool> sat;
    double worst = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < 4; ++j) {
      const double tol = 1e-10 * std::max(chain[j], chain[j + 1]) + floor;
      sat.push_back(chain[j] <= chain[j + 1] + tol);
      worst = std::max(worst, (chain[j] - chain[j + 1]) / (std::max(chain[j], chain[j + 1]) + floor));
    }
    rep.satisfied.push_back(sat);
    rep.worst(k) = worst;

    const double q = (ri / r0) * (ri / r0), qt = (rtm / rt0) * (rtm / rt0);
    nb.observed(k) = q;
    nb.lower(k) = qt / kappa;
    nb.upper(k) = qt * kappa;
    const double tol = 1e-10 * q;
    nb.slack(k) = std::min(q - nb.lower(k), nb.upper(k) - q);
    nb.satisfied.push_back(nb.lower(k) - tol <= q && q <= nb.upper(k) + tol);
  }
  return rep;
}

}  // namespace wgmres::analysis
