#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>

#include "wgmres/curves.hpp"
#include "wgmres/krylov.hpp"

namespace wgmres::forge {

/// T = blockdiag(T_hat, I) with T_hat upper triangular of order m.
struct LinkMatrix {
  Mat t;
  int m = 0;
  RVec sigma;  ///< singular values of t, descending
};

LinkMatrix make_link(const Mat& t, int m);

struct Prescription {
  curves::GVec g;
  std::optional<curves::GVec> g_tilde;
  std::optional<curves::GVec> g_right;
  std::optional<curves::GVec> g_left;
  Vec lambda;
};

struct ForgedInstance {
  Mat a;
  Vec b;
  std::optional<Mat> m;  ///< weight matrix
  std::optional<Mat> h;  ///< preconditioner
  Prescription prescribed;
  std::string provenance;
  std::uint64_t seed = 0;
  std::optional<Mat> w;  ///< nested residual basis used by the construction
  std::optional<Mat> t;  ///< link matrix used by the construction
};

/// (A, b) with spectrum lambda whose GMRES curve is induced by g; b = W g.
/// The first length(g) entries of lambda belong to the Krylov space.
ForgedInstance gps_system(const curves::GVec& g, const Vec& lambda, const std::optional<Mat>& w,
                          std::uint64_t seed);

LinkMatrix link_for_curves(const curves::GVec& g, const curves::GVec& g_tilde);

/// Runs I-GMRES on (A, b) to obtain W, then M = (W T (W T)*)^{-1}.
krylov::WeightMatrix weight_for_curve(const Mat& a, const Vec& b, const curves::GVec& g_tilde);

/// Triangular T with the given singular values: R factor of QR(diag(sigma) V), V random orthogonal.
LinkMatrix link_with_singular_values(const RVec& sigma, std::uint64_t seed);

struct Infeasible {
  double trace_residual;  ///< a^2 + b^2 + d^2 - sigma_1^2 - sigma_2^2
};

std::variant<LinkMatrix, Infeasible> two_by_two_link(const RVec& g, const RVec& g_tilde, const RVec& sigma);

/// Requires svd(T) = {1/sqrt(mu_i)} and g = T g_tilde.
ForgedInstance simultaneous_system(const curves::GVec& g, const curves::GVec& g_tilde, const krylov::WeightMatrix& m,
                                   const Mat& t, const Vec& lambda, std::uint64_t seed);

struct SplitPreconditioner {
  Mat left, right;
};

SplitPreconditioner split_preconditioner(const krylov::WeightMatrix& m);

/// Right preconditioned GMRES on (A, b, H) realizes g_right, left realizes g_left, eig(AH) = lambda.
ForgedInstance left_right_pair(const curves::GVec& g_right, const curves::GVec& g_left, const Vec& lambda,
                               std::uint64_t seed);

/// Instance whose left and right curves are those of (A, b, H) exchanged.
ForgedInstance swap_left_right(const Mat& a, const Vec& b, const Mat& h);

}  // namespace wgmres::forge
