#include "wgmres/krylov.hpp"

#include <cmath>

namespace wgmres::krylov {

WeightMatrix::WeightMatrix(const Mat& m) {
  num::require_finite(m, "weight matrix");
  num::require_hermitian(m);
  m_ = 0.5 * (m + m.adjoint());
  p_ = num::cholesky(m_).factors[0];
  mu_ = num::hermitian_eig(m_).values.real();
  if (!(mu_(0) > 0)) throw Error(ErrorKind::NotPositiveDefinite, "weight matrix has a nonpositive eigenvalue");
  identity_ = m_.isIdentity(0.0);
}

WeightMatrix WeightMatrix::identity(int n) {
  WeightMatrix w;
  w.m_ = Mat::Identity(n, n);
  w.p_ = w.m_;
  w.mu_ = RVec::Ones(n);
  w.identity_ = true;
  return w;
}

cplx WeightMatrix::inner(const Vec& x, const Vec& y) const {
  return identity_ ? y.dot(x) : y.dot(m_ * x);
}

double WeightMatrix::norm(const Vec& x) const {
  if (identity_) return x.norm();
  return std::sqrt(std::max(0.0, x.dot(m_ * x).real()));
}

namespace {

struct Givens {
  double c;
  cplx s;
};

Givens make_givens(cplx a, double b) {
  if (b == 0.0) return {1.0, 0.0};
  if (a == cplx(0.0)) return {0.0, 1.0};
  const double rho = std::hypot(std::abs(a), b);
  return {std::abs(a) / rho, (a / std::abs(a)) * b / rho};
}

void apply(const Givens& g, cplx& x, cplx& y) {
  const cplx t = g.c * x + g.s * y;
  y = -std::conj(g.s) * x + g.c * y;
  x = t;
}

}  // namespace

Trace mgmres(const Mat& a, const Vec& b, const WeightMatrix& m, const Options& opt) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n || b.size() != n || m.size() != n)
    throw Error(ErrorKind::DimensionMismatch, "mgmres dimensions");
  num::require_finite(a, "A");
  num::require_finite(b, "b");
  const int max_iter = opt.max_iter < 0 ? static_cast<int>(n) : std::min<int>(opt.max_iter, n);

  const double beta = m.norm(b);
  if (!(beta > 0)) throw Error(ErrorKind::ZeroInitialResidual, "b is zero");

  Mat v = Mat::Zero(n, max_iter + 1);   // M-orthonormal Arnoldi basis
  Mat mv = m.is_identity() ? Mat() : Mat::Zero(n, max_iter + 1);
  Mat r = Mat::Zero(max_iter + 1, max_iter);  // rotated Hessenberg
  Vec gamma = Vec::Zero(max_iter + 1);
  std::vector<Givens> rot;
  rot.reserve(max_iter);

  v.col(0) = b / beta;
  if (!m.is_identity()) mv.col(0) = m.matrix() * v.col(0);
  gamma(0) = beta;

  Trace tr;
  std::vector<double> norms{beta};
  if (opt.keep_vectors) {
    tr.iterates.push_back(Vec::Zero(n));
    tr.residuals.push_back(b);
  }

  int k = 0;
  while (k < max_iter) {
    const int j = k;
    Vec w = a * v.col(j);
    const double wnorm = m.norm(w);
    Vec h = Vec::Zero(j + 2);
    for (int pass = 0; pass < 2; ++pass) {
      for (int i = 0; i <= j; ++i) {
        const cplx hij = m.is_identity() ? v.col(i).dot(w) : mv.col(i).dot(w);
        w -= hij * v.col(i);
        h(i) += hij;
      }
    }
    double hnext = m.norm(w);
    bool invariant = hnext <= 1e-13 * wnorm || j + 1 == n;
    if (invariant) hnext = 0.0;
    h(j + 1) = hnext;
    if (!invariant) {
      v.col(j + 1) = w / hnext;
      if (!m.is_identity()) mv.col(j + 1) = m.matrix() * v.col(j + 1);
    }

    for (int i = 0; i < j; ++i) apply(rot[i], h(i), h(i + 1));
    if (invariant && std::abs(h(j)) <= 1e-14 * wnorm)
      throw Error(ErrorKind::SingularOperator, "Krylov space is invariant but the residual is not zero");
    Givens gj = make_givens(h(j), hnext);
    rot.push_back(gj);
    h(j) = gj.c * h(j) + gj.s * hnext;
    h(j + 1) = 0.0;
    r.col(j).head(j + 2) = h;
    apply(gj, gamma(j), gamma(j + 1));
    if (invariant) gamma(j + 1) = 0.0;
    ++k;
    norms.push_back(std::abs(gamma(k)));

    if (opt.keep_vectors) {
      Vec y = r.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(gamma.head(k));
      Vec x = v.leftCols(k) * y;
      tr.residuals.push_back(b - a * x);
      tr.iterates.push_back(std::move(x));
    }
    if (invariant) {
      tr.breakdown = true;
      break;
    }
    if (opt.tol > 0 && norms.back() <= opt.tol * beta) break;
  }

  tr.iterations = k;
  tr.residual_norms = Eigen::Map<RVec>(norms.data(), static_cast<Eigen::Index>(norms.size()));

  // W = V Omega* restricted to the first k columns, Omega the accumulated rotations.
  Mat basis = v.leftCols(k + 1);
  for (int j = 0; j < k; ++j) {
    const Givens& g = rot[j];
    Vec left = g.c * basis.col(j) + std::conj(g.s) * basis.col(j + 1);
    basis.col(j + 1) = -g.s * basis.col(j) + g.c * basis.col(j + 1);
    basis.col(j) = left;
  }
  tr.basis_w = basis.leftCols(k);
  tr.g_realized = RVec(k);
  for (int i = 0; i < k; ++i) {
    const double mag = std::abs(gamma(i));
    tr.g_realized(i) = mag;
    if (mag > 0) tr.basis_w.col(i) *= gamma(i) / mag;
  }
  return tr;
}

Mat complete_basis(const Mat& w, const WeightMatrix& m) {
  const Eigen::Index n = w.rows(), k = w.cols();
  if (k == n) return w;
  Mat x = m.chol().adjoint() * w;
  Mat q = num::qr_full_q(x);
  Mat full(n, n);
  full.leftCols(k) = w;
  full.rightCols(n - k) = m.chol().adjoint().triangularView<Eigen::Upper>().solve(q.rightCols(n - k));
  return full;
}

Mat nested_residual_basis(const Mat& a, const Vec& b, const WeightMatrix& m, bool complete) {
  Trace tr = mgmres(a, b, m);
  return complete ? complete_basis(tr.basis_w, m) : tr.basis_w;
}

PrecondTrace preconditioned_gmres(const Mat& a, const Vec& b, const std::optional<Mat>& h_left,
                                  const std::optional<Mat>& h_right, const Options& opt) {
  const Eigen::Index n = a.rows();
  auto check = [&](const std::optional<Mat>& h, const char* name) {
    if (!h) return;
    if (h->rows() != n || h->cols() != n) throw Error(ErrorKind::DimensionMismatch, std::string(name) + " dimensions");
    num::require_finite(*h, name);
    Eigen::FullPivLU<Mat> lu(*h);
    if (!lu.isInvertible()) throw Error(ErrorKind::SingularPreconditioner, std::string(name) + " is singular");
  };
  check(h_left, "H_L");
  check(h_right, "H_R");

  Mat ap = a;
  Vec bp = b;
  if (h_left) {
    ap = (*h_left) * ap;
    bp = (*h_left) * b;
  }
  if (h_right) ap = ap * (*h_right);

  Options o = opt;
  o.keep_vectors = true;
  PrecondTrace pt;
  pt.inner = mgmres(ap, bp, WeightMatrix::identity(static_cast<int>(n)), o);
  pt.minimized = pt.inner.residual_norms;
  const auto steps = pt.inner.iterates.size();
  pt.residual = RVec(steps);
  pt.precond_residual = RVec(steps);
  for (std::size_t i = 0; i < steps; ++i) {
    Vec x = h_right ? Vec((*h_right) * pt.inner.iterates[i]) : pt.inner.iterates[i];
    Vec res = b - a * x;
    Vec hres = h_left ? Vec((*h_left) * res) : res;
    if (h_right) hres = (*h_right) * hres;
    pt.residual(i) = res.norm();
    pt.precond_residual(i) = hres.norm();
    pt.iterates.push_back(std::move(x));
  }
  return pt;
}

}  // namespace wgmres::krylov
