#pragma once

#include <optional>
#include <vector>

#include "wgmres/curves.hpp"
#include "wgmres/numkernel.hpp"

namespace wgmres::krylov {

/// Hermitian positive definite matrix defining <x,y>_M = y* M x.
class WeightMatrix {
 public:
  explicit WeightMatrix(const Mat& m);
  static WeightMatrix identity(int n);

  const Mat& matrix() const { return m_; }
  /// Lower triangular P with M = P P*.
  const Mat& chol() const { return p_; }
  /// Eigenvalues, ascending.
  const RVec& eigenvalues() const { return mu_; }
  bool is_identity() const { return identity_; }
  int size() const { return static_cast<int>(m_.rows()); }

  cplx inner(const Vec& x, const Vec& y) const;
  double norm(const Vec& x) const;
  Vec apply(const Vec& x) const { return identity_ ? x : Vec(m_ * x); }
  double cond() const { return mu_(mu_.size() - 1) / mu_(0); }

 private:
  WeightMatrix() = default;
  Mat m_, p_;
  RVec mu_;
  bool identity_ = false;
};

struct Options {
  double tol = 0.0;      ///< stop once ||r_i||_M <= tol * ||b||_M (0: run to breakdown)
  int max_iter = -1;     ///< -1: the dimension
  bool keep_vectors = false;  ///< retain iterates x_i and residuals b - A x_i
};

struct Trace {
  curves::Curve residual_norms;  ///< r_0 .. r_k in the M-norm
  Mat basis_w;                   ///< n x k M-orthonormal nested residual basis, phase-fixed
  curves::GVec g_realized;       ///< <b, w_i>_M
  int iterations = 0;
  bool breakdown = false;        ///< true when the Krylov space became invariant
  std::vector<Vec> iterates;     ///< x_0 .. x_k when kept
  std::vector<Vec> residuals;    ///< b - A x_i when kept
};

Trace mgmres(const Mat& a, const Vec& b, const WeightMatrix& m, const Options& opt = {});

/// Nested residual basis; with complete=true it is extended to an n x n M-unitary matrix.
Mat nested_residual_basis(const Mat& a, const Vec& b, const WeightMatrix& m, bool complete);

/// Extends the M-orthonormal columns of w to an n x n M-unitary matrix.
Mat complete_basis(const Mat& w, const WeightMatrix& m);

struct PrecondTrace {
  Trace inner;                ///< I-GMRES on (H_L A H_R, H_L b)
  curves::Curve minimized;    ///< ||H_L (b - A x_i)||
  curves::Curve residual;     ///< ||b - A x_i||
  curves::Curve precond_residual;  ///< ||H_R H_L (b - A x_i)||
  std::vector<Vec> iterates;  ///< x_i = H_R u_i
};

PrecondTrace preconditioned_gmres(const Mat& a, const Vec& b, const std::optional<Mat>& h_left,
                                  const std::optional<Mat>& h_right, const Options& opt = {});

}  // namespace wgmres::krylov
