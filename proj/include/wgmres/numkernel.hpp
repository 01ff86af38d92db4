#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "wgmres/error.hpp"

namespace wgmres {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;

namespace num {

enum class FactorKind { QR, SVD, Cholesky, HermitianEig, GeneralEig, LU };

/// Factors are stored in the order their product reconstructs the input:
/// QR -> {Q, R}, SVD -> {U, V} (A = U diag(values) V*), Cholesky -> {P},
/// HermitianEig -> {Q} (A = Q diag(values) Q*), LU -> {P, L, U}.
struct Factorization {
  FactorKind kind;
  std::vector<Mat> factors;
  Vec values;
};

enum class Side { Upper, Lower };

/// Throws NonFinite if any entry is NaN or infinite.
void require_finite(const Mat& a, const char* what);

/// Throws NotHermitian when ||A - A*||_F > tol * ||A||_F.
void require_hermitian(const Mat& a, double tol = 1e-12);

Factorization qr(const Mat& a, bool positive_diag);
/// Square unitary factor of a full QR (all n columns), positive R diagonal.
Mat qr_full_q(const Mat& a);
Factorization svd(const Mat& a);
RVec singular_values(const Mat& a);
Factorization cholesky(const Mat& m);
Factorization hermitian_eig(const Mat& m);
Vec general_eig(const Mat& a);
Factorization lu(const Mat& a);

Mat haar_unitary(int n, std::uint64_t seed, bool real_only);
Vec triangular_solve(const Mat& t, const Vec& rhs, Side side);

/// Max |got_i - ref_i| / max|ref| after greedy nearest pairing, with the
/// reference visited in order of decreasing modulus.
double eigen_pairing_error(const Vec& ref, const Vec& got);

/// 2-norm condition number from singular values.
double cond2(const Mat& a);

}  // namespace num
}  // namespace wgmres
