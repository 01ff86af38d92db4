#include "wgmres/numkernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace wgmres {

const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NotHermitian: return "NotHermitian";
    case ErrorKind::NotMonotone: return "NotMonotone";
    case ErrorKind::ZeroInitialResidual: return "ZeroInitialResidual";
    case ErrorKind::ZeroEigenvalue: return "ZeroEigenvalue";
    case ErrorKind::SpectrumRange: return "SpectrumRange";
    case ErrorKind::LengthExceedsDimension: return "LengthExceedsDimension";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::ZeroTrailingEntry: return "ZeroTrailingEntry";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::UnsupportedField: return "UnsupportedField";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::SingularTriangular: return "SingularTriangular";
    case ErrorKind::SingularOperator: return "SingularOperator";
    case ErrorKind::SingularPreconditioner: return "SingularPreconditioner";
    case ErrorKind::SingularSymmetricPart: return "SingularSymmetricPart";
    case ErrorKind::BreakdownMismatch: return "BreakdownMismatch";
    case ErrorKind::InfeasiblePair: return "InfeasiblePair";
    case ErrorKind::SingularValueMismatch: return "SingularValueMismatch";
    case ErrorKind::RankDeficientBasis: return "RankDeficientBasis";
    case ErrorKind::LinkMismatch: return "LinkMismatch";
    case ErrorKind::BasisMismatch: return "BasisMismatch";
    case ErrorKind::NonFinite: return "NonFinite";
  }
  return "Unknown";
}

bool is_validation(ErrorKind k) {
  switch (k) {
    case ErrorKind::DimensionMismatch:
    case ErrorKind::NotHermitian:
    case ErrorKind::NotMonotone:
    case ErrorKind::ZeroInitialResidual:
    case ErrorKind::ZeroEigenvalue:
    case ErrorKind::SpectrumRange:
    case ErrorKind::LengthExceedsDimension:
    case ErrorKind::LengthMismatch:
    case ErrorKind::ZeroTrailingEntry:
    case ErrorKind::InvalidConfig:
    case ErrorKind::ParseError:
    case ErrorKind::UnsupportedField:
    case ErrorKind::IoError:
    case ErrorKind::NonFinite:
      return true;
    default:
      return false;
  }
}

namespace num {

void require_finite(const Mat& a, const char* what) {
  if (!a.allFinite()) throw Error(ErrorKind::NonFinite, std::string(what) + " has non-finite entries");
}

void require_hermitian(const Mat& m, double tol) {
  if (m.rows() != m.cols()) throw Error(ErrorKind::DimensionMismatch, "matrix is not square");
  const double nrm = m.norm();
  if ((m - m.adjoint()).norm() > tol * nrm)
    throw Error(ErrorKind::NotHermitian, "matrix is not Hermitian within tolerance");
}

Factorization qr(const Mat& a, bool positive_diag) {
  require_finite(a, "qr input");
  const Eigen::Index m = a.rows(), n = a.cols();
  if (n > m) throw Error(ErrorKind::RankDeficient, "more columns than rows");
  Eigen::HouseholderQR<Mat> h(a);
  Mat q = h.householderQ() * Mat::Identity(m, n);
  Mat r = h.matrixQR().topRows(n).triangularView<Eigen::Upper>();
  const double fro = a.norm();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(r(i, i)) <= 1e-14 * fro)
      throw Error(ErrorKind::RankDeficient, "pivot " + std::to_string(i) + " below tolerance");
  }
  if (positive_diag) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const cplx ph = r(i, i) / std::abs(r(i, i));
      q.col(i) *= ph;
      r.row(i) *= std::conj(ph);
      r(i, i) = std::abs(r(i, i));
    }
  }
  return {FactorKind::QR, {q, r}, r.diagonal()};
}

Mat qr_full_q(const Mat& a) {
  const Eigen::Index m = a.rows(), n = a.cols();
  Eigen::HouseholderQR<Mat> h(a);
  Mat q = h.householderQ();
  for (Eigen::Index i = 0; i < std::min(m, n); ++i) {
    const cplx d = h.matrixQR()(i, i);
    if (std::abs(d) > 0) q.col(i) *= d / std::abs(d);
  }
  return q;
}

Factorization svd(const Mat& a) {
  require_finite(a, "svd input");
  Eigen::JacobiSVD<Mat> s(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (s.info() != Eigen::Success) throw Error(ErrorKind::ConvergenceFailure, "svd did not converge");
  return {FactorKind::SVD, {s.matrixU(), s.matrixV()}, s.singularValues().cast<cplx>()};
}

RVec singular_values(const Mat& a) {
  require_finite(a, "svd input");
  if (std::max(a.rows(), a.cols()) > 64) {
    Eigen::BDCSVD<Mat> s(a);
    if (s.info() != Eigen::Success) throw Error(ErrorKind::ConvergenceFailure, "svd did not converge");
    return s.singularValues();
  }
  Eigen::JacobiSVD<Mat> s(a);
  if (s.info() != Eigen::Success) throw Error(ErrorKind::ConvergenceFailure, "svd did not converge");
  return s.singularValues();
}

Factorization cholesky(const Mat& m) {
  require_finite(m, "cholesky input");
  require_hermitian(m);
  Mat herm = 0.5 * (m + m.adjoint());
  Eigen::LLT<Mat> llt(herm);
  if (llt.info() != Eigen::Success) throw Error(ErrorKind::NotPositiveDefinite, "nonpositive pivot");
  Mat p = llt.matrixL();
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    if (!(p(i, i).real() > 0)) throw Error(ErrorKind::NotPositiveDefinite, "nonpositive pivot");
  }
  return {FactorKind::Cholesky, {p}, p.diagonal()};
}

Factorization hermitian_eig(const Mat& m) {
  require_finite(m, "eig input");
  require_hermitian(m);
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m + m.adjoint()));
  if (es.info() != Eigen::Success) throw Error(ErrorKind::ConvergenceFailure, "hermitian eig failed");
  return {FactorKind::HermitianEig, {es.eigenvectors()}, es.eigenvalues().cast<cplx>()};
}

Vec general_eig(const Mat& a) {
  require_finite(a, "eig input");
  if (a.rows() != a.cols()) throw Error(ErrorKind::DimensionMismatch, "eig of non-square matrix");
  Eigen::ComplexEigenSolver<Mat> es(a, false);
  if (es.info() != Eigen::Success) throw Error(ErrorKind::ConvergenceFailure, "eig did not converge");
  return es.eigenvalues();
}

Factorization lu(const Mat& a) {
  require_finite(a, "lu input");
  Eigen::PartialPivLU<Mat> f(a);
  Mat l = Mat::Identity(a.rows(), a.cols());
  l.triangularView<Eigen::StrictlyLower>() = f.matrixLU();
  Mat u = f.matrixLU().triangularView<Eigen::Upper>();
  Mat p = f.permutationP().transpose() * Mat::Identity(a.rows(), a.rows());
  return {FactorKind::LU, {p, l, u}, u.diagonal()};
}

Mat haar_unitary(int n, std::uint64_t seed, bool real_only) {
  if (n < 1) throw Error(ErrorKind::InvalidConfig, "haar_unitary needs n >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  Mat z(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) z(i, j) = real_only ? cplx(nd(rng), 0.0) : cplx(nd(rng), nd(rng));
  // Phase-fixed QR of a Gaussian matrix is Haar distributed.
  return qr(z, true).factors[0];
}

Vec triangular_solve(const Mat& t, const Vec& rhs, Side side) {
  if (t.rows() != t.cols() || t.rows() != rhs.size())
    throw Error(ErrorKind::DimensionMismatch, "triangular_solve dimensions");
  for (Eigen::Index i = 0; i < t.rows(); ++i)
    if (t(i, i) == cplx(0.0)) throw Error(ErrorKind::SingularTriangular, "zero diagonal at " + std::to_string(i));
  if (side == Side::Upper) return t.triangularView<Eigen::Upper>().solve(rhs);
  return t.triangularView<Eigen::Lower>().solve(rhs);
}

double eigen_pairing_error(const Vec& ref, const Vec& got) {
  if (ref.size() != got.size()) throw Error(ErrorKind::DimensionMismatch, "eigenvalue multisets differ in size");
  const Eigen::Index n = ref.size();
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return std::abs(ref(a)) > std::abs(ref(b)); });
  std::vector<bool> used(n, false);
  double scale = 0.0, worst = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) scale = std::max(scale, std::abs(ref(i)));
  for (auto i : order) {
    Eigen::Index best = -1;
    double bd = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (used[j]) continue;
      const double d = std::abs(got(j) - ref(i));
      if (d < bd) { bd = d; best = j; }
    }
    used[best] = true;
    worst = std::max(worst, bd);
  }
  return scale > 0 ? worst / scale : worst;
}

double cond2(const Mat& a) {
  RVec s = singular_values(a);
  return s(0) / s(s.size() - 1);
}

}  // namespace num
}  // namespace wgmres
