#include "wgmres/forge.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

namespace wgmres::forge {

namespace {

curves::GVec pad(const RVec& g, Eigen::Index n) {
  curves::GVec out = curves::GVec::Zero(n);
  out.head(std::min(n, g.size())) = g.head(std::min(n, g.size()));
  return out;
}

// Realized decrease vector of a replayed run. Entries below 1e-8 |g| are
// rounding left over from stagnation steps and are set to zero.
curves::GVec realized(const RVec& g, Eigen::Index n) {
  curves::GVec out = pad(g, n);
  const double floor = 1e-8 * out.norm();
  for (Eigen::Index i = 0; i < n; ++i)
    if (out(i) <= floor) out(i) = 0.0;
  return out;
}

void require_unitary(const Mat& w, Eigen::Index n) {
  if (w.rows() != n || w.cols() != n) throw Error(ErrorKind::DimensionMismatch, "W must be n x n");
  if ((w.adjoint() * w - Mat::Identity(n, n)).norm() > 1e-10 * std::sqrt(double(n)))
    throw Error(ErrorKind::InvalidConfig, "W is not unitary");
}

// Distinct eigenvalues with their positions, and the log of the squared
// Lagrange coefficient at zero for each of them.
struct SeedShape {
  std::vector<std::vector<Eigen::Index>> groups;
  std::vector<double> lagrange;
};

SeedShape seed_shape(const Vec& lam) {
  const Eigen::Index m = lam.size();
  SeedShape sh;
  std::vector<bool> taken(m, false);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (taken[i]) continue;
    sh.groups.push_back({i});
    taken[i] = true;
    for (Eigen::Index j = i + 1; j < m; ++j)
      if (!taken[j] && lam(j) == lam(i)) {
        sh.groups.back().push_back(j);
        taken[j] = true;
      }
  }
  const std::size_t d = sh.groups.size();
  sh.lagrange.assign(d, 0.0);
  for (std::size_t p = 0; p < d; ++p) {
    const cplx li = lam(sh.groups[p][0]);
    for (std::size_t q = 0; q < d; ++q) {
      if (q == p) continue;
      const cplx lj = lam(sh.groups[q][0]);
      sh.lagrange[p] += std::log(std::abs(lj)) - std::log(std::abs(lj - li));
    }
  }
  const double top = *std::max_element(sh.lagrange.begin(), sh.lagrange.end());
  for (double& v : sh.lagrange) v -= top;
  return sh;
}

// Nonderogatory matrix with eigenvalues lam and a cyclic start vector. Equal
// eigenvalues share a Jordan block; logw holds one log squared weight per block.
void seed_matrix(const Vec& lam, const SeedShape& sh, const Eigen::VectorXd& logw, Mat& x, Vec& c) {
  const Eigen::Index m = lam.size();
  x = Mat::Zero(m, m);
  c = Vec(m);
  Eigen::Index pos = 0;
  for (std::size_t p = 0; p < sh.groups.size(); ++p) {
    const double wt = std::exp(0.5 * logw(static_cast<Eigen::Index>(p)));
    for (std::size_t k = 0; k < sh.groups[p].size(); ++k, ++pos) {
      x(pos, pos) = lam(sh.groups[p][0]);
      if (k > 0) x(pos - 1, pos) = 1.0;
      c(pos) = wt;
    }
  }
}

// Start weights are powers of the Lagrange coefficients at zero; alpha = 1
// makes the last Krylov residual as large as possible, alpha = 0 gives equal weights.
Eigen::VectorXd alpha_weights(const SeedShape& sh, double alpha) {
  Eigen::VectorXd w(static_cast<Eigen::Index>(sh.lagrange.size()));
  for (std::size_t p = 0; p < sh.lagrange.size(); ++p) w(static_cast<Eigen::Index>(p)) = alpha * sh.lagrange[p];
  return w;
}

// Upper Hessenberg h = q* x q from Arnoldi on (x, c).
Mat seed_hessenberg(const Mat& x, const Vec& c) {
  const Eigen::Index m = c.size();
  Mat q = Mat::Zero(m, m), h = Mat::Zero(m, m);
  q.col(0) = c / c.norm();
  for (Eigen::Index j = 0; j < m; ++j) {
    Vec w = x * q.col(j);
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index i = 0; i <= j; ++i) {
        const cplx hij = q.col(i).dot(w);
        w -= hij * q.col(i);
        h(i, j) += hij;
      }
    }
    if (j + 1 < m) {
      const double s = w.norm();
      if (s <= 1e-14 * h.col(j).norm())
        throw Error(ErrorKind::BreakdownMismatch, "spectrum does not admit a cyclic vector");
      h(j + 1, j) = s;
      q.col(j + 1) = w / s;
    }
  }
  return h;
}

// log r_k, k = 1..m-1, of the seed's own GMRES run from its start vector.
Eigen::VectorXd seed_log_curve(const Mat& h) {
  const Eigen::Index m = h.rows();
  const Mat qf = num::qr_full_q(h.leftCols(m - 1));
  Eigen::VectorXd out(m - 1);
  double tail = 0.0;
  for (Eigen::Index i = m - 1; i >= 1; --i) {
    tail += std::norm(qf(0, i));
    out(i - 1) = 0.5 * std::log(tail);
  }
  return out;
}

// Residuals of the seed curve against the target in log scale. The last entry
// pins the mean log weight so that the problem is not underdetermined.
struct SeedFit {
  using Scalar = double;
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

  const Vec& lam;
  const SeedShape& shape;
  Eigen::VectorXd target;

  int inputs() const { return static_cast<int>(shape.groups.size()); }
  int values() const { return static_cast<int>(std::max<Eigen::Index>(target.size() + 1, inputs())); }

  int operator()(const Eigen::VectorXd& w, Eigen::VectorXd& f) const {
    f = Eigen::VectorXd::Zero(values());
    Mat x;
    Vec c;
    seed_matrix(lam, shape, w, x, c);
    try {
      f.head(target.size()) = seed_log_curve(seed_hessenberg(x, c)) - target;
    } catch (const Error&) {
      f.head(target.size()).setConstant(1e3);
    }
    f(target.size()) = w.mean();
    return 0;
  }
};

// s maps seed coordinates to nested-basis coordinates: s z_i = e_i for the
// phase-fixed nested basis z of h K(h, e_1), and s e_1 = g.
Mat seed_map(const RVec& g, const Mat& h) {
  const Eigen::Index m = g.size();
  // h K_j(h, e_1) is spanned by the first j columns of h.
  Mat qf = num::qr_full_q(h.leftCols(m - 1));
  Mat z = qf.leftCols(m - 1);
  Vec nu = qf.col(m - 1);
  for (Eigen::Index i = 0; i < m - 1; ++i) {
    const cplx p = std::conj(z(0, i));
    if (std::abs(p) > 0) z.col(i) *= p / std::abs(p);
  }
  const cplx nr = std::conj(nu(0));
  Mat e = Mat::Identity(m, m - 1);
  Vec gc = g.cast<cplx>();
  Mat s = e * z.adjoint();
  s += (gc - e * z.row(0).adjoint()) * (nu.adjoint() / nr);
  return s;
}

double curve_error(const curves::Curve& got, const curves::Curve& ref) {
  const Eigen::Index k = std::min(got.size(), ref.size()) - 1;
  double e = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) e = std::max(e, std::abs(got(i) - ref(i)) / ref(i));
  return e;
}

// Operator of order m (in the coordinates of the nested basis) whose GMRES
// run from g has residual decrease vector g and whose spectrum is lam.
// Any cyclic seed gives the same operator in exact arithmetic; seeds whose own
// curve is close to the target keep the similarity well conditioned.
Mat prescribed_block(const RVec& g, const Vec& lam) {
  const Eigen::Index m = g.size();
  if (m == 1) return Mat::Constant(1, 1, lam(0));
  const RVec rg = g / g.norm();
  const Vec gc = rg.cast<cplx>();
  const curves::Curve target = curves::g_to_curve(rg);
  const SeedShape shape = seed_shape(lam);

  Mat best_a;
  double best = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_w;
  auto attempt = [&](const Eigen::VectorXd& logw) {
    Mat x, h;
    Vec c;
    seed_matrix(lam, shape, logw, x, c);
    try {
      h = seed_hessenberg(x, c);
    } catch (const Error&) {
      return false;
    }
    const Mat s = seed_map(rg, h);
    // a s = s h, solved as s^T a^T = (s h)^T.
    Eigen::PartialPivLU<Mat> lu(s.transpose());
    const Mat sh = s * h;
    Mat a = lu.solve(Mat(sh.transpose())).transpose();
    double k;
    try {
      const auto tr = krylov::mgmres(a, gc, krylov::WeightMatrix::identity(static_cast<int>(m)));
      k = tr.residual_norms.size() == m + 1 ? curve_error(tr.residual_norms, target)
                                            : std::numeric_limits<double>::infinity();
      // Rounding in the final change of basis is amplified by the conditioning of s.
      const RVec sv = num::singular_values(s);
      k += std::numeric_limits<double>::epsilon() * sv(0) / sv(m - 1);
    } catch (const Error&) {
      return true;
    }
    if (k < best) {
      best = k;
      best_a = std::move(a);
      best_w = logw;
    }
    return true;
  };

  bool cyclic = false;
  for (double alpha : {1.0, 0.75, 1.25, 0.5, 1.5, 0.25, 0.0}) cyclic = attempt(alpha_weights(shape, alpha)) || cyclic;
  if (!cyclic) throw Error(ErrorKind::BreakdownMismatch, "spectrum does not admit a cyclic vector");

  // Fit the seed weights so that the seed's own curve matches the target.
  if (!(best <= 1e-11)) {
    SeedFit fit{lam, shape, target.segment(1, m - 1).array().log().matrix()};
    Eigen::NumericalDiff<SeedFit> diff(fit);
    std::mt19937_64 rng(0x9e3779b97f4a7c15ULL);
    std::normal_distribution<double> nd(0.0, 1.0);
    const Eigen::VectorXd base = best_w.size() ? best_w : alpha_weights(shape, 1.0);
    for (double spread : {1.0, 3.0}) {
      Eigen::LevenbergMarquardt<Eigen::NumericalDiff<SeedFit>> lm(diff);
      lm.parameters.maxfev = 20 * (fit.inputs() + 1);
      Eigen::VectorXd w = base;
      for (Eigen::Index i = 0; i < w.size(); ++i) w(i) += spread * nd(rng);
      lm.minimize(w);
      attempt(w);
      if (best <= 1e-11) break;
    }
  }
  if (best_a.size() == 0) throw Error(ErrorKind::BreakdownMismatch, "no seed reproduces the curve");
  return best_a;
}

}  // namespace

LinkMatrix make_link(const Mat& t, int m) {
  return {t, m, num::singular_values(t)};
}

ForgedInstance gps_system(const curves::GVec& g, const Vec& lambda, const std::optional<Mat>& w, std::uint64_t seed) {
  const Eigen::Index n = g.size();
  curves::validate_g(g);
  if (lambda.size() != n) throw Error(ErrorKind::DimensionMismatch, "lambda must have one entry per dimension");
  const int m = curves::length(g);
  if (m == 0) throw Error(ErrorKind::InvalidConfig, "g is zero");
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double a = std::abs(lambda(i));
    if (a == 0.0) throw Error(ErrorKind::ZeroEigenvalue, "eigenvalue " + std::to_string(i) + " is zero");
    lo = std::min(lo, a);
    hi = std::max(hi, a);
  }
  if (hi / lo > 1e10) throw Error(ErrorKind::SpectrumRange, "eigenvalue modulus ratio exceeds 1e10");

  Mat basis = w ? *w : num::haar_unitary(static_cast<int>(n), seed, false);
  if (w) require_unitary(basis, n);

  Mat ahat = Mat::Zero(n, n);
  ahat.topLeftCorner(m, m) = prescribed_block(g.head(m), lambda.head(m));
  for (Eigen::Index i = m; i < n; ++i) ahat(i, i) = lambda(i);

  ForgedInstance inst;
  inst.a = basis * ahat * basis.adjoint();
  inst.b = basis * g.cast<cplx>();
  inst.prescribed.g = g;
  inst.prescribed.lambda = lambda;
  inst.provenance = "gps_system";
  inst.seed = seed;
  inst.w = basis;

  if (m < n) {
    auto tr = krylov::mgmres(inst.a, inst.b, krylov::WeightMatrix::identity(static_cast<int>(n)));
    if (!tr.breakdown || tr.iterations != m)
      throw Error(ErrorKind::BreakdownMismatch,
                  "expected breakdown at " + std::to_string(m) + ", got " + std::to_string(tr.iterations));
  }
  return inst;
}

LinkMatrix link_for_curves(const curves::GVec& g, const curves::GVec& gt) {
  if (g.size() != gt.size()) throw Error(ErrorKind::LengthMismatch, "g and g_tilde differ in dimension");
  curves::validate_g(g);
  curves::validate_g(gt);
  const int m = curves::length(g);
  if (m != curves::length(gt)) throw Error(ErrorKind::LengthMismatch, "g and g_tilde differ in length");
  if (m == 0) throw Error(ErrorKind::InvalidConfig, "zero residual decrease vectors");
  const Eigen::Index n = g.size();
  Mat t = Mat::Identity(n, n);
  const int l = m - 1;
  for (int i = 0; i < m; ++i) {
    const bool gz = g(i) == 0.0, tz = gt(i) == 0.0;
    if (!gz && !tz) {
      t(i, i) = g(i) / gt(i);
    } else if (gz && tz) {
      t(i, i) = 1.0;
    } else if (gz) {
      t(i, i) = -g(l) / gt(i);
      t(i, l) = g(l) / gt(l);
    } else {
      t(i, i) = 1.0;
      t(i, l) = g(i) / gt(l);
    }
  }
  return make_link(t, m);
}

krylov::WeightMatrix weight_for_curve(const Mat& a, const Vec& b, const curves::GVec& gt) {
  const Eigen::Index n = a.rows();
  if (gt.size() != n) throw Error(ErrorKind::DimensionMismatch, "g_tilde dimension");
  auto id = krylov::WeightMatrix::identity(static_cast<int>(n));
  auto tr = krylov::mgmres(a, b, id);
  if (!tr.breakdown) throw Error(ErrorKind::BreakdownMismatch, "I-GMRES did not terminate");
  if (curves::length(gt) != tr.iterations)
    throw Error(ErrorKind::LengthMismatch, "g_tilde length " + std::to_string(curves::length(gt)) +
                                               " differs from breakdown index " + std::to_string(tr.iterations));
  Mat w = krylov::complete_basis(tr.basis_w, id);
  auto link = link_for_curves(realized(tr.g_realized, n), gt);
  Mat tinv = link.t.triangularView<Eigen::Upper>().solve(Mat::Identity(n, n));
  Mat x = w * tinv.adjoint();
  Mat m = x * x.adjoint();
  return krylov::WeightMatrix(0.5 * (m + m.adjoint()));
}

LinkMatrix link_with_singular_values(const RVec& sigma, std::uint64_t seed) {
  const Eigen::Index n = sigma.size();
  if (n == 0) throw Error(ErrorKind::InvalidConfig, "empty singular value list");
  for (Eigen::Index i = 0; i < n; ++i)
    if (!(sigma(i) > 0)) throw Error(ErrorKind::InvalidConfig, "singular values must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ud(-1.0, 1.0);
  Mat u(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) u(i, j) = ud(rng);
  Mat v = num::qr(u, true).factors[0];
  Mat t = num::qr(sigma.cast<cplx>().asDiagonal() * v, true).factors[1];
  return make_link(t, static_cast<int>(n));
}

std::variant<LinkMatrix, Infeasible> two_by_two_link(const RVec& g, const RVec& gt, const RVec& sigma) {
  if (g.size() != 2 || gt.size() != 2 || sigma.size() != 2)
    throw Error(ErrorKind::DimensionMismatch, "two_by_two_link takes pairs");
  if (g(1) == 0.0 || gt(1) == 0.0) throw Error(ErrorKind::ZeroTrailingEntry, "g_2 and g_tilde_2 must be nonzero");
  const double a = sigma(0) * sigma(1) * gt(1) / g(1);
  const double d = g(1) / gt(1);
  const double bb = (g(0) - a * gt(0)) / gt(1);
  const double target = sigma(0) * sigma(0) + sigma(1) * sigma(1);
  const double res = a * a + bb * bb + d * d - target;
  if (std::abs(res) > 1e-10 * target) return Infeasible{res};
  Mat t(2, 2);
  t << a, bb, 0.0, d;
  return make_link(t, 2);
}

ForgedInstance simultaneous_system(const curves::GVec& g, const curves::GVec& gt, const krylov::WeightMatrix& m,
                                   const Mat& t, const Vec& lambda, std::uint64_t seed) {
  const Eigen::Index n = g.size();
  if (gt.size() != n || t.rows() != n || t.cols() != n || m.size() != n)
    throw Error(ErrorKind::DimensionMismatch, "simultaneous_system dimensions");
  RVec s = num::singular_values(t);
  RVec expect(n);
  for (Eigen::Index i = 0; i < n; ++i) expect(i) = 1.0 / std::sqrt(m.eigenvalues()(i));  // descending
  if ((s - expect).cwiseAbs().maxCoeff() > 1e-8 * expect(0))
    throw Error(ErrorKind::SingularValueMismatch, "svd(T) differs from 1/sqrt(mu)");
  if ((g.cast<cplx>() - t * gt.cast<cplx>()).norm() > 1e-8 * g.norm())
    throw Error(ErrorKind::LinkMismatch, "g differs from T g_tilde");

  auto et = num::hermitian_eig(t * t.adjoint());  // ascending tau
  Mat qm_desc = num::hermitian_eig(m.matrix()).factors[0].rowwise().reverse();
  Mat w = qm_desc * et.factors[0].adjoint();

  ForgedInstance inst = gps_system(g, lambda, w, seed);
  inst.m = m.matrix();
  inst.t = t;
  inst.prescribed.g_tilde = gt;
  inst.provenance = "simultaneous_system";
  return inst;
}

SplitPreconditioner split_preconditioner(const krylov::WeightMatrix& m) {
  const Mat& p = m.chol();
  const Eigen::Index n = p.rows();
  Mat left = p.adjoint();
  Mat right = left.triangularView<Eigen::Upper>().solve(Mat::Identity(n, n));
  return {left, right};
}

ForgedInstance left_right_pair(const curves::GVec& g_right, const curves::GVec& g_left, const Vec& lambda,
                               std::uint64_t seed) {
  const Eigen::Index n = g_right.size();
  if (g_left.size() != n) throw Error(ErrorKind::LengthMismatch, "g_R and g_L differ in dimension");
  auto link = link_for_curves(g_right, g_left);
  Mat w = num::haar_unitary(static_cast<int>(n), seed, false);
  Mat wt = w * link.t;
  Mat tinv = link.t.triangularView<Eigen::Upper>().solve(Mat::Identity(n, n));
  Mat x = w * tinv.adjoint();
  krylov::WeightMatrix m(Mat(x * x.adjoint()));

  ForgedInstance inst = gps_system(g_right, lambda, w, seed);
  Mat h = m.chol().adjoint();
  Mat hinv = h.triangularView<Eigen::Upper>().solve(Mat::Identity(n, n));
  inst.a = inst.a * hinv;
  inst.h = h;
  inst.m = m.matrix();
  inst.t = link.t;
  inst.prescribed.g_right = g_right;
  inst.prescribed.g_left = g_left;
  inst.provenance = "left_right_pair";
  return inst;
}

ForgedInstance swap_left_right(const Mat& a, const Vec& b, const Mat& h) {
  const Eigen::Index n = a.rows();
  if (h.rows() != n || h.cols() != n || b.size() != n) throw Error(ErrorKind::DimensionMismatch, "swap dimensions");
  if (!Eigen::FullPivLU<Mat>(h).isInvertible()) throw Error(ErrorKind::SingularPreconditioner, "H is singular");
  auto id = krylov::WeightMatrix::identity(static_cast<int>(n));
  Mat al = h * a;
  Vec bl = h * b;
  auto left = krylov::mgmres(al, bl, id);
  auto right = krylov::mgmres(Mat(a * h), b, id);
  if (!left.breakdown || !right.breakdown)
    throw Error(ErrorKind::BreakdownMismatch, "preconditioned runs did not terminate");
  curves::GVec gl = realized(left.g_realized, n), gr = realized(right.g_realized, n);
  Mat w = krylov::complete_basis(left.basis_w, id);
  auto link = link_for_curves(gl, gr);
  Mat tinv = link.t.triangularView<Eigen::Upper>().solve(Mat::Identity(n, n));

  ForgedInstance inst;
  inst.h = tinv * w.adjoint();
  inst.a = al * w * link.t;
  inst.b = bl;
  inst.w = w;
  inst.t = link.t;
  inst.prescribed.g = gl;
  inst.prescribed.g_right = gl;
  inst.prescribed.g_left = gr;
  inst.prescribed.lambda = num::general_eig(Mat(a * h));
  inst.provenance = "swap_left_right";
  return inst;
}

}  // namespace wgmres::forge
