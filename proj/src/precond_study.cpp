#include "wgmres/precond_study.hpp"

#include <cmath>
#include <random>

namespace wgmres::lab {

PrecondKind parse_precond_kind(const std::string& s) {
  if (s == "sym-part") return PrecondKind::SymPart;
  if (s == "ilu0") return PrecondKind::Ilu0;
  if (s == "supplied") return PrecondKind::Supplied;
  throw Error(ErrorKind::InvalidConfig, "unknown preconditioner '" + s + "'");
}

std::string to_string(PrecondKind k) {
  switch (k) {
    case PrecondKind::SymPart: return "sym-part";
    case PrecondKind::Ilu0: return "ilu0";
    case PrecondKind::Supplied: return "supplied";
  }
  return "?";
}

Mat sym_part_preconditioner(const Mat& a) {
  const Eigen::Index n = a.rows();
  Mat s = 0.5 * (a + a.adjoint());
  Eigen::FullPivLU<Mat> lu(s);
  if (!lu.isInvertible() || lu.rcond() < 1e-300)
    throw Error(ErrorKind::SingularSymmetricPart, "(A + A*)/2 is singular");
  return lu.solve(Mat::Identity(n, n));
}

Mat ilu0_preconditioner(const Mat& a) {
  const Eigen::Index n = a.rows();
  Mat f = a;
  // IKJ variant restricted to the nonzero pattern of A.
  for (Eigen::Index i = 1; i < n; ++i) {
    for (Eigen::Index k = 0; k < i; ++k) {
      if (a(i, k) == cplx(0.0)) continue;
      if (f(k, k) == cplx(0.0)) throw Error(ErrorKind::SingularPreconditioner, "zero pivot in ILU(0)");
      f(i, k) /= f(k, k);
      for (Eigen::Index j = k + 1; j < n; ++j)
        if (a(i, j) != cplx(0.0)) f(i, j) -= f(i, k) * f(k, j);
    }
  }
  for (Eigen::Index i = 0; i < n; ++i)
    if (f(i, i) == cplx(0.0)) throw Error(ErrorKind::SingularPreconditioner, "zero pivot in ILU(0)");
  Mat y = f.triangularView<Eigen::UnitLower>().solve(Mat::Identity(n, n));
  return f.triangularView<Eigen::Upper>().solve(y);
}

namespace {

int first_below(const RVec& c, double tol) {
  for (Eigen::Index i = 0; i < c.size(); ++i)
    if (c(i) <= tol) return static_cast<int>(i);
  return -1;
}

}  // namespace

PrecondStudy precond_study(const Mat& a, const PrecondOptions& opt) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n) throw Error(ErrorKind::DimensionMismatch, "matrix must be square");
  num::require_finite(a, "A");

  Mat h;
  switch (opt.kind) {
    case PrecondKind::SymPart: h = sym_part_preconditioner(a); break;
    case PrecondKind::Ilu0: h = ilu0_preconditioner(a); break;
    case PrecondKind::Supplied:
      if (!opt.supplied) throw Error(ErrorKind::InvalidConfig, "no preconditioner supplied");
      h = *opt.supplied;
      break;
  }

  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> nd;
  Vec b(n);
  for (Eigen::Index i = 0; i < n; ++i) b(i) = nd(rng);
  const double bn = b.norm();
  Vec xs = Eigen::PartialPivLU<Mat>(a).solve(b);
  const double xn = xs.norm();

  krylov::Options o;
  o.max_iter = opt.max_iter;
  o.tol = 1e-14;
  auto left = krylov::preconditioned_gmres(a, b, h, std::nullopt, o);
  auto right = krylov::preconditioned_gmres(a, b, std::nullopt, h, o);

  auto errors = [&](const krylov::PrecondTrace& t) {
    RVec e(t.iterates.size());
    for (std::size_t i = 0; i < t.iterates.size(); ++i) e(i) = (t.iterates[i] - xs).norm() / xn;
    return e;
  };

  PrecondStudy st;
  st.n = static_cast<int>(n);
  // Every norm is relative to ||b||, including the left preconditioned one.
  st.table.labels = {"left_minimized", "left_residual", "left_error", "right_minimized", "right_precond_residual",
                     "right_error"};
  st.table.columns = {left.minimized / bn, left.residual / bn, errors(left),
                      right.minimized / bn, right.precond_residual / bn, errors(right)};
  st.left_iters = first_below(st.table.columns[0], 1e-8);
  st.right_iters = first_below(st.table.columns[3], 1e-8);

  RVec sh = num::singular_values(h);
  Mat ha = h * a, ah = a * h;
  RVec sha = num::singular_values(ha), sah = num::singular_values(ah);
  st.sigma_max_h = sh(0);
  st.sigma_min_h = sh(sh.size() - 1);
  st.norm_ha = sha(0);
  st.norm_ah = sah(0);
  st.cond_ha = sha(0) / sha(sha.size() - 1);
  st.cond_ah = sah(0) / sah(sah.size() - 1);

  if (opt.run_unpreconditioned) {
    krylov::Options u;
    u.max_iter = static_cast<int>(n) - 1;
    auto tr = krylov::mgmres(a, b, krylov::WeightMatrix::identity(static_cast<int>(n)), u);
    RVec rel = tr.residual_norms / bn;
    st.unprec_iters = first_below(rel, 1e-8);
    st.unprec_final = rel(rel.size() - 1);
    st.table.labels.push_back("unpreconditioned");
    st.table.columns.push_back(rel);
  }
  return st;
}

}  // namespace wgmres::lab
