#pragma once

#include <string>
#include <vector>

#include "wgmres/forge.hpp"
#include "wgmres/krylov.hpp"

namespace wgmres::analysis {

struct BoundReport {
  RVec lower, observed, upper, slack;
  std::vector<bool> satisfied;
  bool all() const;
};

/// ||r~_k||_M from B = (b W_k): 1 / sqrt(((B* M B)^{-1})_{11}).
double ipsen_residual_norm(const Mat& w_k, const Vec& b, const krylov::WeightMatrix& m);

/// ((B* M B)^{-1})_{11}, which equals ||r~_k||_M^{-2}.
double ipsen_inverse_entry(const Mat& w_k, const Vec& b, const krylov::WeightMatrix& m);

/// Residual of the M-minimization over span(W_k): B (B* M B)^{-1} e_1 / ((B* M B)^{-1})_{11}.
Vec ipsen_residual(const Mat& w_k, const Vec& b, const krylov::WeightMatrix& m);

enum class Ratio {
  TildeI_TildeM,  ///< ||r~_k||_I / ||r~_k||_M
  RM_RI,          ///< ||r_k||_M / ||r_k||_I
  RI_TildeM,      ///< ||r_k||_I / ||r~_k||_M
  TildeI_RI,      ///< ||r~_k||_I / ||r_k||_I
  TildeN_RN,      ///< ||r~_k||_N / ||r_k||_N
};

/// r_k is the I-GMRES residual, r~_k the M-GMRES residual; both minimize over span(W_k).
double norm_ratio(const Mat& w_k, const Vec& b, const krylov::WeightMatrix& m, const krylov::WeightMatrix& n,
                  Ratio which);

/// sigma_min(T_{k+1:m}) ||r~_k||_M <= ||r_k||_I <= sigma_max(T_{k+1:m}) ||r~_k||_M for k < m.
struct LookaheadReport {
  BoundReport bounds;
  std::vector<bool> interlacing;
  bool all() const;
};

LookaheadReport lookahead_bounds(const forge::LinkMatrix& t, const krylov::Trace& trace_i,
                                 const krylov::Trace& trace_m);

struct Check {
  std::string name;
  bool pass = false;
  double residual = 0.0;
  bool informational = false;
};

struct NecessaryConditionsReport {
  std::vector<Check> checks;
  Vec xi;  ///< eigenvalues of T, decreasing modulus
  bool stated_ratio_is_eigenvalue = false;     ///< g~_m / g_m
  bool corrected_ratio_is_eigenvalue = false;  ///< g_m / g~_m
  bool all() const;
  const Check& get(const std::string& name) const;
};

NecessaryConditionsReport necessary_conditions(const forge::LinkMatrix& t, const RVec& g, const RVec& g_tilde,
                                               const RVec& sigma, double tol = 1e-9);

struct CharacterizationResult {
  bool ok = false;
  Mat t;
  double unitary_residual = 0.0;  ///< ||(WT)* M (WT) - I||_F / sqrt(n)
  double rhs_residual = 0.0;      ///< ||b - W T g~|| / ||b||
  double curve_error = 0.0;       ///< max relative deviation of the M-curve from g~'s curve
  std::string failure;
};

CharacterizationResult verify_weight_characterization(const Mat& a, const Vec& b, const krylov::WeightMatrix& m,
                                                      const curves::GVec& g_tilde);

/// With M = H* H and A = A_hat H^{-1}, the left preconditioned run is M-GMRES(A_hat, b).
CharacterizationResult verify_preconditioner_characterization(const Mat& a_hat, const Vec& b, const Mat& h,
                                                              const curves::GVec& g_left);

/// T = W* W~ from the completed I- and M-bases of the same system.
forge::LinkMatrix extract_link(const krylov::Trace& trace_i, const krylov::Trace& trace_m,
                               const krylov::WeightMatrix& m);

/// The chain mu_min||r||^2 <= mu_min||r~||_I^2 <= ||r~||_M^2 <= ||r||_M^2 <= mu_max||r||^2.
/// Both traces must retain residual vectors.
struct SandwichReport {
  std::vector<std::vector<bool>> satisfied;  ///< per k, the four inequalities
  RVec worst;                                ///< largest scaled violation per k (<= 0 when satisfied)
  BoundReport normalized;                    ///< kappa^{-1} q~ <= q <= kappa q~
  bool all() const;
};

SandwichReport sandwich(const krylov::Trace& trace_i, const krylov::Trace& trace_m, const krylov::WeightMatrix& m);

/// Largest relative deviation max_k |r_k - ref_k| / ref_k over k with ref_k > 0, plus
/// absolute deviation where ref_k = 0 scaled by ref_0.
double curve_deviation(const curves::Curve& got, const curves::Curve& ref);

}  // namespace wgmres::analysis
